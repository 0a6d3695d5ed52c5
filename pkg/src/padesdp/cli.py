"""Command-line harness: experiments, error tables, membership checks and SDPA export.

Exit codes: 0 on success, 2 when a reported gap exceeds --tol, 1 on error.
"""

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import List, Optional

import numpy as np

from . import experiments
from .errors import ParseError

EXIT_OK, EXIT_ERROR, EXIT_TOLERANCE = 0, 1, 2

DEFAULT_TOL = {"maxent": 1e-5, "gp": 1e-5, "tracevar": 1e-4}


# -- JSON matrix encoding --------------------------------------------------------

def encode_matrix(M) -> dict:
    """Row-major real and imaginary parts."""
    M = np.atleast_2d(np.asarray(M))
    return {"rows": M.shape[0], "cols": M.shape[1],
            "real": np.real(M).ravel().tolist(), "imag": np.imag(M).ravel().tolist()}


def decode_matrix(obj, name: str = "matrix") -> np.ndarray:
    try:
        if isinstance(obj, list):
            return np.array(obj, dtype=float)
        r, c = int(obj["rows"]), int(obj["cols"])
        re = np.array(obj["real"], dtype=float).reshape(r, c)
        im = np.array(obj.get("imag", [0.0] * (r * c)), dtype=float).reshape(r, c)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix {name!r}: {exc}") from exc
    return re + 1j * im if np.any(im) else re


def load_triple(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object with X, Y, T")
    missing = [key for key in ("X", "Y", "T") if key not in data]
    if missing:
        raise ParseError(f"{path}: missing fields {missing}")
    return (decode_matrix(data["X"], "X"), decode_matrix(data["Y"], "Y"), decode_matrix(data["T"], "T"),
            data.get("m"), data.get("k"))


# -- helpers -----------------------------------------------------------------------

def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _run_one(job):
    name, kwargs = job
    return getattr(experiments, name)(**kwargs).to_dict()


def _run_jobs(jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def _emit(payload, args) -> None:
    text = json.dumps(payload, indent=2)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _experiment(args, name: str, extra: dict, n_default: str) -> int:
    ns = _int_list(args.n or n_default)
    seeds = _int_list(args.seed)
    jobs = [(name, {"n": n, "seed": s, "m": args.m, "k": args.k, **extra}) for n, s in product(ns, seeds)]
    reports = _run_jobs(jobs, args.jobs)
    tol = DEFAULT_TOL[name] if args.tol is None else args.tol
    for r in reports:
        r["tolerance"] = tol
        r["within_tolerance"] = bool(r["gap"] <= tol)
    _emit(reports if len(reports) > 1 else reports[0], args)
    return EXIT_OK if all(r["within_tolerance"] for r in reports) else EXIT_TOLERANCE


# -- subcommands ---------------------------------------------------------------------

def cmd_maxent(args) -> int:
    return _experiment(args, "maxent", {"ell": args.ell}, "50")


def cmd_gp(args) -> int:
    return _experiment(args, "gp", {"ell": args.ell, "terms": args.terms, "sparsity": args.sparsity}, "10")


def cmd_tracevar(args) -> int:
    return _experiment(args, "tracevar", {}, "2")


def cmd_approx_error(args) -> int:
    grid = np.logspace(np.log10(args.xmin), np.log10(args.xmax), args.points)
    if args.include_one:
        grid = np.unique(np.append(grid, 1.0))
    rows = experiments.approx_error(_int_list(args.m_list), _int_list(args.k_list), grid)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["m", "k", "x", "error", "bound"])
    writer.writeheader()
    writer.writerows(rows)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh)
    if not args.csv:
        sys.stdout.write(buf.getvalue())
    violated = [r for r in rows if r["error"] > r["bound"] * (1 + 1e-8) + 1e-14]
    return EXIT_TOLERANCE if violated else EXIT_OK


def cmd_membership(args) -> int:
    from .cone_factory import check_membership, op_rel_entr_epi_cone
    from .sdp import feasibility

    X, Y, T, m, k = load_triple(args.input)
    m = args.m if m is None else int(m)
    k = args.k if k is None else int(k)
    tol = 1e-8 if args.tol is None else args.tol
    oracle = bool(check_membership(X, Y, T, m, k, "oracle", tol=tol))
    field = "complex" if any(np.iscomplexobj(A) for A in (X, Y, T)) else "real"
    sys_ = op_rel_entr_epi_cone(X.shape[0], m, k, field)
    res = feasibility(sys_, {"X": X, "Y": Y, "T": T}, tol=tol)
    payload = {"m": m, "k": k, "member": oracle, "oracle": oracle, "sdp": bool(res.feasible),
               "shift": res.shift, "agree": oracle == bool(res.feasible)}
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2)
    print(f"member: {str(oracle).lower()}")
    print(f"sdp: {str(bool(res.feasible)).lower()} (shift {res.shift:.3e})")
    return EXIT_OK if payload["agree"] else EXIT_TOLERANCE


def _export_problem(args):
    from .sdp import compile_system

    if args.problem == "maxent":
        A, b = experiments.maxent_instance(int(args.n or 50), args.ell, int(args.seed))
        system, objective = experiments.maxent_system(A, b, args.m, args.k)
        return compile_system(system, objective, None, "max")
    if args.problem == "gp":
        inst = experiments.gp_instance(int(args.n or 10), args.ell, args.terms, args.sparsity, int(args.seed))
        system, objective = experiments.gp_system(inst, args.m, args.k)
        return compile_system(system, objective, None, "min")
    if args.problem == "tracevar":
        from .quantum import REDUCED, quantum_rel_entr_epigraph

        Y = experiments.unit_trace_pd(int(args.n or 2), int(args.seed))
        system = quantum_rel_entr_epigraph(Y.shape[0], args.m, args.k, REDUCED, "real")
        return compile_system(system, {"A": np.eye(Y.shape[0]), "tau": -1.0}, {"B": Y}, "max")
    from .cone_factory import op_rel_entr_epi_cone

    X, Y, T, m, k = load_triple(args.input)
    m = args.m if m is None else int(m)
    k = args.k if k is None else int(k)
    field = "complex" if any(np.iscomplexobj(A) for A in (X, Y, T)) else "real"
    system = op_rel_entr_epi_cone(X.shape[0], m, k, field)
    return compile_system(system, None, {"X": X, "Y": Y, "T": T}, feasibility=True)


def cmd_export_sdpa(args) -> int:
    from .sdp import export_sdpa, import_sdpa

    if args.problem == "membership" and not args.input:
        raise ParseError("membership export needs --input")
    problem = _export_problem(args)
    text = export_sdpa(problem, args.output)
    if args.check:
        again = export_sdpa(import_sdpa(text))
        if again != text:
            print("round trip changed the file", file=sys.stderr)
            return EXIT_TOLERANCE
    if not args.output:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.output}: {problem.num_vars} variables, {len(problem.blocks)} blocks")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="padesdp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_help="dimension (comma-separated list allowed)"):
        sp.add_argument("--m", type=int, default=3, help="quadrature nodes")
        sp.add_argument("--k", type=int, default=3, help="square-root steps")
        sp.add_argument("--n", default=None, help=n_help)
        sp.add_argument("--seed", default="1", help="instance seed (comma-separated list allowed)")
        sp.add_argument("--tol", type=float, default=None, help="gap tolerance for exit code 2")
        sp.add_argument("--json", default=None, metavar="PATH", help="also write the JSON report here")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers over instances")

    sp = sub.add_parser("maxent", help="maximum entropy with linear equalities")
    common(sp)
    sp.add_argument("--ell", type=int, default=25, help="number of equality constraints")
    sp.set_defaults(func=cmd_maxent)

    sp = sub.add_parser("gp", help="random geometric program")
    common(sp)
    sp.add_argument("--ell", type=int, default=10, help="number of posynomial constraints")
    sp.add_argument("--terms", type=int, default=5, help="terms per posynomial")
    sp.add_argument("--sparsity", type=float, default=0.5, help="density of the exponent matrices")
    sp.set_defaults(func=cmd_gp)

    sp = sub.add_parser("tracevar", help="max Tr A - D(A||Y) against Tr Y")
    common(sp)
    sp.set_defaults(func=cmd_tracevar)

    sp = sub.add_parser("approx-error", help="table of |r_{m,k}(x) - log x| and its bound")
    sp.add_argument("--m", dest="m_list", default="1,2,3,4", help="comma-separated m values")
    sp.add_argument("--k", dest="k_list", default="1,2,3,4", help="comma-separated k values")
    sp.add_argument("--xmin", type=float, default=1e-3)
    sp.add_argument("--xmax", type=float, default=1e3)
    sp.add_argument("--points", type=int, default=61)
    sp.add_argument("--include-one", action="store_true", help="add x = 1 to the grid")
    sp.add_argument("--csv", default=None, metavar="PATH")
    sp.add_argument("--json", default=None, metavar="PATH")
    sp.set_defaults(func=cmd_approx_error)

    sp = sub.add_parser("membership", help="check (X, Y, T) against the relative entropy cone")
    sp.add_argument("--input", required=True, help="JSON file with X, Y, T (and optionally m, k)")
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--tol", type=float, default=None,
                    help="PSD tolerance of the oracle and shift threshold of the SDP (default 1e-8)")
    sp.add_argument("--json", default=None, metavar="PATH")
    sp.set_defaults(func=cmd_membership)

    sp = sub.add_parser("export-sdpa", help="compile a problem and write it in SDPA format")
    sp.add_argument("--problem", choices=["maxent", "gp", "tracevar", "membership"], default="tracevar")
    sp.add_argument("--input", default=None, help="JSON triple for the membership problem")
    sp.add_argument("--output", default=None, help="destination file (stdout when omitted)")
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n", default=None)
    sp.add_argument("--seed", default="1")
    sp.add_argument("--ell", type=int, default=10)
    sp.add_argument("--terms", type=int, default=5)
    sp.add_argument("--sparsity", type=float, default=0.5)
    sp.add_argument("--check", action="store_true", help="verify the export/import round trip")
    sp.set_defaults(func=cmd_export_sdpa)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
