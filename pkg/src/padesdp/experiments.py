"""Desk-scale experiments: maximum entropy, geometric programming, the
variational formula for the trace, and approximation-error tables.

Each experiment solves an SDP built from the relative entropy cone
approximation and compares it against an independent smooth Newton oracle
that shares no code with the SDP path.
"""

import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .cone_factory import add_relative_entropy_core
from .errors import ConvergenceError
from .lmi import REAL, Affine, LinearMatrixSystem
from .quadrature import gauss_legendre
from .quantum import REDUCED, quantum_rel_entr_epigraph
from .rng import XorShift64Star
from .scalar_approx import error_bound_log, eval_rmk, log_approximant


@dataclass
class ExperimentReport:
    name: str
    params: dict
    sdp_value: float
    oracle_value: float
    wall_time: float
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return abs(self.sdp_value - self.oracle_value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap"] = self.gap
        return d


def _entropy_terms(sys: LinearMatrixSystem, X: Affine, Y: Affine, m: int, k: int, prefix: str):
    """Objective coefficients of 2^k sum_j w_j T_j <= P_{r_{m,k}}(Y, X) ~ -x log(x/y)."""
    sys_Ts = add_relative_entropy_core(sys, X, Y, m, k, REAL, prefix)
    w = gauss_legendre(m).weights
    return sys_Ts, {f"{prefix}T{j}": 2.0**k * float(wj) for j, wj in enumerate(w, start=1)}


# -- maximum entropy -----------------------------------------------------------

def maxent_instance(n: int, ell: int, seed: int):
    """Gaussian A (ell x n) and b = A xbar, xbar uniform in (0.5, 1.5) scaled to sum 1."""
    g = XorShift64Star(seed)
    A = g.normal((ell, n))
    xbar = g.uniform(n, 0.5, 1.5)
    xbar = xbar / xbar.sum()
    return A, A @ xbar


def maxent_oracle(A, b, tol: float = 1e-13, max_iter: int = 200):
    """max -sum x log x s.t. Ax = b through the smooth dual
    min_lam b^T lam + sum_i exp(-1 - (A^T lam)_i), damped Newton."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lam = np.zeros(A.shape[0])

    def dual(l):
        return float(b @ l + np.sum(np.exp(-1.0 - A.T @ l)))

    gtol = 1e-13 * (1.0 + float(np.linalg.norm(b)))
    for _ in range(max_iter):
        x = np.exp(-1.0 - A.T @ lam)
        grad = b - A @ x
        H = (A * x) @ A.T
        step = np.linalg.solve(H, -grad)
        dec = float(-grad @ step)
        # the decrement alone can be tiny while A x - b is not, when H is badly scaled
        if dec / 2.0 <= tol and np.linalg.norm(grad) <= gtol:
            return dual(lam), x
        s, f0 = 1.0, dual(lam)
        while dual(lam + s * step) > f0 - 0.25 * s * dec:
            s *= 0.5
            if s < 1e-12:
                break
        if s < 1e-12:
            if dec / 2.0 <= tol:
                # converged to roundoff; take the full Newton step and stop
                lam = lam + step
                x = np.exp(-1.0 - A.T @ lam)
                return dual(lam), x
            raise ConvergenceError("maxent oracle line search failed")
        lam = lam + s * step
    raise ConvergenceError("maxent oracle did not converge")


def maxent_system(A, b, m: int, k: int):
    """Variables x_i with Ax = b; entropy terms t_i <= -x_i log x_i approximated."""
    ell, n = A.shape
    sys = LinearMatrixSystem(f"maxent(n={n}, ell={ell}, m={m}, k={k})")
    xs = [sys.add_variable(f"x{i}", 1, REAL) for i in range(n)]
    objective = {}
    one = Affine(np.ones((1, 1)))
    for i, x in enumerate(xs):
        _, coef = _entropy_terms(sys, x, one, m, k, f"e{i}_")
        objective.update(coef)
    for r in range(ell):
        row = xs[0] * float(A[r, 0])
        for i in range(1, n):
            row = row + xs[i] * float(A[r, i])
        sys.add_equality(f"row {r}", row, float(b[r]))
    return sys, objective


def maxent(n: int = 50, ell: int = 25, seed: int = 1, m: int = 3, k: int = 3,
           A=None, b=None, **solver_kwargs) -> ExperimentReport:
    from .sdp import optimize

    start = time.perf_counter()
    if A is None:
        A, b = maxent_instance(n, ell, seed)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    ell, n = A.shape
    sys, objective = maxent_system(A, b, m, k)
    res = optimize(sys, objective, None, "max", **solver_kwargs)
    oracle, _ = maxent_oracle(A, b)
    return ExperimentReport("maxent", {"n": n, "ell": ell, "seed": seed, "m": m, "k": k},
                            res.value, oracle, time.perf_counter() - start, res.status)


# -- geometric programming -----------------------------------------------------

@dataclass
class GPInstance:
    """minimize f_0(x) s.t. f_i(x) <= 1, f_i(x) = sum_j c[i][j] prod_l x_l^{a[i][j, l]}."""

    coeffs: List[np.ndarray]
    exponents: List[np.ndarray]

    @property
    def num_vars(self) -> int:
        return self.exponents[0].shape[1]

    def log_posynomial(self, i: int, y):
        """log f_i(e^y), computed stably."""
        z = self.exponents[i] @ y + np.log(self.coeffs[i])
        zmax = np.max(z)
        return zmax + np.log(np.sum(np.exp(z - zmax)))


def gp_instance(n: int, ell: int, terms: int, sparsity: float, seed: int) -> GPInstance:
    """Random posynomials with a bounded, strictly feasible region.

    Each constraint's exponent vectors sum to zero and y = 0 is strictly
    feasible (constraint coefficients sum to 1/2), so the feasible set in
    log-variables is compact once the exponents span R^n.
    """
    if terms < 2:
        raise ValueError("need at least two terms per posynomial")
    g = XorShift64Star(seed)

    def exps(count):
        E = g.normal((count, n)) * g.bernoulli(sparsity, (count, n))
        return E

    coeffs = [g.uniform(terms, 0.5, 1.5)]
    exponents = [exps(terms)]
    for _ in range(ell):
        E = exps(terms - 1)
        exponents.append(np.vstack([E, -E.sum(axis=0)]))
        c = g.uniform(terms, 0.5, 1.5)
        coeffs.append(0.5 * c / c.sum())
    return GPInstance(coeffs, exponents)


def _lse_parts(inst: GPInstance, i: int, y):
    """Value, gradient and Hessian of log f_i(e^y)."""
    E = inst.exponents[i]
    z = E @ y + np.log(inst.coeffs[i])
    zmax = np.max(z)
    p = np.exp(z - zmax)
    s = p.sum()
    p = p / s
    grad = E.T @ p
    return zmax + np.log(s), grad, (E.T * p) @ E - np.outer(grad, grad)


def _damped_newton(F, derivs, y, max_step: float = np.inf, tol: float = 1e-11, max_iter: int = 500,
                   stop=None):
    """Minimize F from y with backtracking Newton steps of length <= max_step."""
    n = y.size
    for _ in range(max_iter):
        if stop is not None and stop(y):
            return y
        grad, H = derivs(y)
        step = np.linalg.solve(H + 1e-14 * (1.0 + np.trace(H)) * np.eye(n), -grad)
        norm = np.linalg.norm(step)
        if norm > max_step:
            step *= max_step / norm
        dec = float(-grad @ step)
        f0 = F(y)
        if dec / 2.0 <= tol + 1e-15 * abs(f0):
            return y
        s = 1.0
        while F(y + s * step) > f0 - 0.25 * s * dec:
            s *= 0.5
            if s < 1e-14:
                return y
        y = y + s * step
    raise ConvergenceError("gp oracle Newton iteration did not converge")


def gp_oracle(inst: GPInstance, tol: float = 1e-10, max_outer: int = 60):
    """Barrier method with damped Newton centering on
    min log f_0(e^y) s.t. log f_i(e^y) <= 0.  Returns (f_0*, y*).

    A phase-one Newton run on log sum_i f_i(e^y) (steps capped at length 1)
    finds a strictly feasible start when y = 0 is not one.
    """
    n = inst.num_vars
    ell = len(inst.coeffs) - 1
    cons = range(1, ell + 1)

    def worst(y):
        return max(inst.log_posynomial(i, y) for i in cons) if ell else -1.0

    y = np.zeros(n)
    if ell and worst(y) >= -1e-9:
        merged = GPInstance([np.concatenate([inst.coeffs[i] for i in cons])],
                            [np.vstack([inst.exponents[i] for i in cons])])

        def derivs1(y):
            _, g, H = _lse_parts(merged, 0, y)
            return g, H

        y = _damped_newton(lambda y: merged.log_posynomial(0, y), derivs1, y, max_step=1.0,
                           stop=lambda y: worst(y) < -1e-3)
        if worst(y) >= 0.0:
            raise ConvergenceError("gp instance appears infeasible")

    def barrier(t):
        def F(y):
            vals = [inst.log_posynomial(i, y) for i in cons]
            if vals and max(vals) >= 0:
                return np.inf
            return t * inst.log_posynomial(0, y) - sum(np.log(-v) for v in vals)

        def derivs(y):
            _, g0, H0 = _lse_parts(inst, 0, y)
            grad, H = t * g0, t * H0
            for i in cons:
                v, gi, Hi = _lse_parts(inst, i, y)
                grad = grad - gi / v
                H = H - Hi / v + np.outer(gi, gi) / v**2
            return grad, H

        return F, derivs

    t = 1.0
    for _ in range(max_outer):
        y = _damped_newton(*barrier(t), y)
        if ell / t < tol:
            return float(np.exp(inst.log_posynomial(0, y))), y
        t *= 10.0
    raise ConvergenceError("gp oracle did not reach the requested gap")


def gp_system(inst: GPInstance, m: int, k: int):
    """Log variables y; each monomial c e^{a^T y} <= u with u bounded by the
    hypograph of r_{m,k}: a^T y + log c <= 2^k sum_j w_j T_j <= r_{m,k}(u)."""
    n = inst.num_vars
    sys = LinearMatrixSystem(f"gp(n={n}, m={m}, k={k})")
    ys = [sys.add_variable(f"y{l}", 1, REAL) for l in range(n)]
    one = Affine(np.ones((1, 1)))
    w = gauss_legendre(m).weights
    objective = {}
    for i, (c, E) in enumerate(zip(inst.coeffs, inst.exponents)):
        total = None
        for j in range(len(c)):
            u = sys.add_variable(f"u{i}_{j}", 1, REAL)
            Ts = add_relative_entropy_core(sys, one, u, m, k, REAL, f"g{i}_{j}_")
            expo = Affine(np.full((1, 1), np.log(c[j])))
            for l in range(n):
                if E[j, l] != 0.0:
                    expo = expo + ys[l] * float(E[j, l])
            bound = Ts[0] * (2.0**k * float(w[0]))
            for T, wj in zip(Ts[1:], w[1:]):
                bound = bound + T * (2.0**k * float(wj))
            sys.add_block(f"monomial {i}.{j}", bound - expo)
            if i == 0:
                objective[f"u{i}_{j}"] = 1.0
            else:
                total = u if total is None else total + u
        if i > 0:
            sys.add_block(f"posynomial {i}", 1.0 - total)
    return sys, objective


def gp(n: int = 10, ell: int = 10, terms: int = 5, sparsity: float = 0.5, seed: int = 1,
       m: int = 3, k: int = 3, instance: Optional[GPInstance] = None, **solver_kwargs) -> ExperimentReport:
    from .sdp import optimize

    start = time.perf_counter()
    inst = instance or gp_instance(n, ell, terms, sparsity, seed)
    sys, objective = gp_system(inst, m, k)
    res = optimize(sys, objective, None, "min", **solver_kwargs)
    status = res.status
    try:
        oracle, _ = gp_oracle(inst)
    except ConvergenceError as exc:
        oracle, status = float("nan"), f"oracle failed: {exc}"
    return ExperimentReport("gp", {"n": inst.num_vars, "ell": len(inst.coeffs) - 1, "terms": terms,
                                   "sparsity": sparsity, "seed": seed, "m": m, "k": k},
                            res.value, oracle, time.perf_counter() - start, status)


# -- variational trace ---------------------------------------------------------

def unit_trace_pd(n: int, seed: int) -> np.ndarray:
    """Y = G G^T + I/n, normalized to unit trace (real symmetric)."""
    g = XorShift64Star(seed)
    G = g.normal((n, n))
    Y = G @ G.T + np.eye(n) / n
    Y = 0.5 * (Y + Y.T)
    return Y / np.trace(Y)


def tracevar(n: int = 2, seed: int = 1, m: int = 3, k: int = 3, Y=None, **solver_kwargs) -> ExperimentReport:
    """p = max over A of Tr A - D(A||Y); the identity Tr Y = p is the oracle."""
    from .sdp import optimize

    start = time.perf_counter()
    Y = unit_trace_pd(n, seed) if Y is None else np.asarray(Y, dtype=float)
    n = Y.shape[0]
    sys = quantum_rel_entr_epigraph(n, m, k, REDUCED, REAL)
    res = optimize(sys, {"A": np.eye(n), "tau": -1.0}, {"B": Y}, "max", **solver_kwargs)
    return ExperimentReport("tracevar", {"n": n, "seed": seed, "m": m, "k": k},
                            res.value, float(np.trace(Y)), time.perf_counter() - start, res.status)


# -- approximation error table -------------------------------------------------

def approx_error(m_list: Sequence[int], k_list: Sequence[int], grid) -> List[dict]:
    """Rows (m, k, x, error, bound) of |r_{m,k}(x) - log x| and its closed-form bound."""
    grid = np.asarray(grid, dtype=float)
    rows = []
    for m in m_list:
        for k in k_list:
            vals = eval_rmk(log_approximant(m, k), grid)
            errs = np.abs(vals - np.log(grid))
            bounds = error_bound_log(grid, m, k)
            for x, e, bd in zip(grid, errs, bounds):
                rows.append({"m": int(m), "k": int(k), "x": float(x), "error": float(e), "bound": float(bd)})
    return rows
