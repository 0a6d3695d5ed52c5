import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from padesdp.cli import decode_matrix, encode_matrix, load_triple, main
from padesdp.cone_factory import rmk_perspective
from padesdp.errors import ParseError
from padesdp.sdp import import_sdpa
from oracles import random_pd


def write_triple(path, X, Y, T, **extra):
    data = {"X": encode_matrix(X), "Y": encode_matrix(Y), "T": encode_matrix(T), **extra}
    path.write_text(json.dumps(data))
    return str(path)


class TestCodec:
    def test_round_trip_complex(self, rng):
        M = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        np.testing.assert_array_equal(decode_matrix(encode_matrix(M)), M)

    def test_real_stays_real(self):
        assert not np.iscomplexobj(decode_matrix(encode_matrix(np.eye(2))))

    def test_nested_list(self):
        np.testing.assert_array_equal(decode_matrix([[1, 2], [3, 4]]), [[1, 2], [3, 4]])

    def test_malformed(self):
        with pytest.raises(ParseError):
            decode_matrix({"rows": 2, "cols": 2, "real": [1.0]})

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{\n  \"X\": [1,\n")
        with pytest.raises(ParseError, match="line"):
            load_triple(str(p))

    def test_missing_field(self, tmp_path):
        p = tmp_path / "t.json"
        p.write_text(json.dumps({"X": [[1.0]]}))
        with pytest.raises(ParseError, match="missing"):
            load_triple(str(p))


class TestExperimentsCommands:
    def test_tracevar_json(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["tracevar", "--n", "2", "--seed", "1", "--json", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["name"] == "tracevar" and report["within_tolerance"]
        assert report["gap"] == pytest.approx(abs(report["sdp_value"] - report["oracle_value"]))
        assert json.loads(capsys.readouterr().out) == report

    def test_tolerance_violation(self, capsys):
        assert main(["tracevar", "--n", "2", "--m", "1", "--k", "0", "--tol", "1e-12"]) == 2

    def test_seed_list(self, capsys):
        assert main(["tracevar", "--n", "2", "--seed", "1,2"]) == 0
        reports = json.loads(capsys.readouterr().out)
        assert [r["params"]["seed"] for r in reports] == [1, 2]

    def test_jobs(self, capsys):
        assert main(["tracevar", "--n", "2", "--seed", "1,2", "--jobs", "2"]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 2

    def test_maxent_small(self, capsys):
        assert main(["maxent", "--n", "8", "--ell", "3"]) == 0

    def test_gp_small(self, capsys):
        assert main(["gp", "--n", "4", "--ell", "3", "--terms", "3"]) == 0

    def test_reproducible(self, capsys):
        main(["maxent", "--n", "8", "--ell", "3", "--seed", "4"])
        a = json.loads(capsys.readouterr().out)
        main(["maxent", "--n", "8", "--ell", "3", "--seed", "4"])
        b = json.loads(capsys.readouterr().out)
        assert abs(a["sdp_value"] - b["sdp_value"]) <= 1e-12
        assert a["oracle_value"] == b["oracle_value"]

    def test_bad_list(self):
        with pytest.raises(SystemExit):
            main(["tracevar", "--m", "x"])


class TestApproxErrorCommand:
    def test_csv(self, tmp_path):
        out = tmp_path / "e.csv"
        assert main(["approx-error", "--m", "1,3", "--k", "3", "--points", "4", "--include-one", "--csv", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 10
        ones = [r for r in rows if float(r["x"]) == 1.0]
        assert ones and all(float(r["error"]) == 0.0 for r in ones)

    def test_stdout_and_json(self, tmp_path, capsys):
        out = tmp_path / "e.json"
        assert main(["approx-error", "--m", "2", "--k", "2", "--points", "3", "--json", str(out)]) == 0
        assert capsys.readouterr().out.startswith("m,k,x,error,bound")
        assert len(json.loads(out.read_text())) == 3


class TestMembershipCommand:
    def test_identity(self, tmp_path, capsys):
        path = write_triple(tmp_path / "t.json", np.eye(2), np.eye(2), np.zeros((2, 2)))
        assert main(["membership", "--input", path]) == 0
        assert "member: true" in capsys.readouterr().out

    def test_perturbed_agree(self, tmp_path, capsys, rng):
        X, Y = random_pd(rng, 2), random_pd(rng, 2)
        P = rmk_perspective(Y, X, 2, 2)
        for delta, expected in ((1e-4, "true"), (-1e-4, "false")):
            path = write_triple(tmp_path / "t.json", X, Y, -P + delta * np.eye(2), m=2, k=2)
            out = tmp_path / "m.json"
            assert main(["membership", "--input", path, "--json", str(out)]) == 0
            assert f"member: {expected}" in capsys.readouterr().out
            assert json.loads(out.read_text())["agree"]

    def test_bad_input(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("not json")
        assert main(["membership", "--input", str(p)]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["membership", "--input", str(tmp_path / "nope.json")]) == 1


class TestExportCommand:
    @pytest.mark.parametrize("problem,extra", [("tracevar", ["--n", "2"]), ("maxent", ["--n", "6", "--ell", "2"]),
                                               ("gp", ["--n", "3", "--ell", "2", "--terms", "3"])])
    def test_export_check(self, tmp_path, capsys, problem, extra):
        out = tmp_path / "p.dat-s"
        assert main(["export-sdpa", "--problem", problem, "--output", str(out), "--check", *extra]) == 0
        assert import_sdpa(out).num_vars > 0

    def test_membership_export(self, tmp_path, capsys):
        path = write_triple(tmp_path / "t.json", np.eye(2), np.eye(2), np.zeros((2, 2)))
        assert main(["export-sdpa", "--problem", "membership", "--input", path, "--m", "1", "--k", "1"]) == 0
        assert import_sdpa(capsys.readouterr().out).num_vars > 0

    def test_membership_needs_input(self, capsys):
        assert main(["export-sdpa", "--problem", "membership"]) == 1


class TestModuleEntry:
    def test_python_m(self):
        proc = subprocess.run([sys.executable, "-m", "padesdp", "approx-error", "--m", "1", "--k", "1", "--points", "3"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "m,k,x,error,bound"
