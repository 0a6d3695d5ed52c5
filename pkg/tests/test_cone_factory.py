import math

import numpy as np
import pytest

from padesdp.cone_factory import (
    build_certificate,
    certificate_T,
    check_membership,
    d_op,
    geomean_chain,
    hypograph_ft,
    matrix_hypograph_rmk,
    op_rel_entr_epi_cone,
    perspective_ft,
    perspective_ft_plus,
    rmk_perspective,
)
from padesdp.errors import DomainError
from padesdp.hermitian import geometric_mean
from padesdp.lmi import COMPLEX
from padesdp.scalar_approx import eval_rmk, f_t, log_approximant
from padesdp.sdp.api import feasibility, optimize
from oracles import mfun, perspective, random_pd


def lam_min(M):
    return float(np.linalg.eigvalsh(M)[0])


class TestHypograph:
    def test_boundary(self):
        sys = hypograph_ft(0.5, 1)
        (B,) = sys.evaluate_blocks({"X": np.array([[2.0]]), "T": np.array([[2 / 3]])})
        assert abs(lam_min(B)) <= 1e-14

    def test_identity(self):
        sys = hypograph_ft(0.3, 2)
        (B,) = sys.evaluate_blocks({"X": np.eye(2), "T": np.zeros((2, 2))})
        np.testing.assert_allclose(B, np.diag([0, 0, 1, 1]), atol=1e-15)

    @pytest.mark.parametrize("t", [0.0, 0.2, 0.7, 1.0])
    def test_exact_and_perturbed(self, rng, t):
        X = random_pd(rng, 3)
        T = mfun(X, lambda w: f_t(t, w))
        sys = hypograph_ft(t, 3)
        assert sys.is_satisfied({"X": X, "T": T}, 1e-9)
        assert not sys.is_satisfied({"X": X, "T": T + 1e-6 * np.eye(3)}, 1e-12)

    def test_bad_t(self):
        with pytest.raises(DomainError):
            hypograph_ft(1.5, 1)

    def test_maximize(self):
        res = optimize(hypograph_ft(0.5, 1), {"T": 1.0}, {"X": 2.0}, sense="max")
        assert res.value == pytest.approx(2 / 3, abs=1e-8)


class TestPerspectiveBlocks:
    def test_equal_arguments(self, rng):
        Y = random_pd(rng, 2)
        sys = perspective_ft(0.4, 2)
        assert sys.is_satisfied({"X": Y, "Y": Y, "T": np.zeros((2, 2))})

    def test_scalar_tight(self):
        sys = perspective_ft(0.5, 1)
        (B,) = sys.evaluate_blocks({"X": [[2.0]], "Y": [[1.0]], "T": [[2 / 3]]})
        assert abs(lam_min(B)) <= 1e-14

    def test_matrix_oracle(self, rng):
        X, Y = random_pd(rng, 3, True), random_pd(rng, 3, True)
        t = 0.35
        T = perspective(lambda w: f_t(t, w), X, Y)
        sys = perspective_ft(t, 3, COMPLEX)
        assert sys.is_satisfied({"X": X, "Y": Y, "T": T}, 1e-9)
        assert not sys.is_satisfied({"X": X, "Y": Y, "T": T + 1e-6 * np.eye(3)}, 1e-12)

    def test_harmonic_tight(self):
        sys = perspective_ft_plus(0.5, 1)
        (B,) = sys.evaluate_blocks({"X": [[2.0]], "Y": [[1.0]], "T": [[4 / 3]]})
        assert abs(lam_min(B)) <= 1e-14

    def test_harmonic_matrix(self, rng):
        X, Y = random_pd(rng, 3), random_pd(rng, 3)
        t = 0.3
        H = np.linalg.inv((1 - t) * np.linalg.inv(X) + t * np.linalg.inv(Y))
        sys = perspective_ft_plus(t, 3)
        assert sys.is_satisfied({"X": X, "Y": Y, "T": H}, 1e-9)
        assert not sys.is_satisfied({"X": X, "Y": Y, "T": H + 1e-6 * np.eye(3)}, 1e-12)

    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_harmonic_endpoint(self, t):
        with pytest.raises(DomainError):
            perspective_ft_plus(t, 1)


class TestGeomeanChain:
    def test_identity(self):
        sys = geomean_chain(3, 2)
        a = {"X": np.eye(2), "Y": np.eye(2), "V": np.eye(2)}
        a.update({f"Z{i}": np.eye(2) for i in range(4)})
        assert sys.is_satisfied(a)

    def test_scalar_boundary(self):
        sys = geomean_chain(2, 1)
        assert feasibility(sys, {"X": 1.0, "Y": 16.0, "V": 2.0}).shift <= 1e-7
        assert not feasibility(sys, {"X": 1.0, "Y": 16.0, "V": 2.0 + 1e-3}).feasible
        assert feasibility(sys, {"X": 1.0, "Y": 16.0, "V": 2.0 - 1e-3}).feasible

    def test_certificate(self, rng):
        k = 3
        X, Y = random_pd(rng, 3), random_pd(rng, 3)
        Z = [Y]
        for _ in range(k):
            Z.append(geometric_mean(X, Z[-1], 0.5))
        np.testing.assert_allclose(Z[-1], geometric_mean(X, Y, 2.0**-k), atol=1e-10)
        a = {"X": X, "Y": Y, "V": Z[-1]}
        a.update({f"Z{i}": Zi for i, Zi in enumerate(Z)})
        assert geomean_chain(k, 3).is_satisfied(a, 1e-9)

    def test_needs_positive_k(self):
        with pytest.raises(ValueError):
            geomean_chain(0, 1)


class TestCone:
    @pytest.mark.parametrize("n,m,k", [(1, 1, 0), (2, 3, 2), (3, 2, 4)])
    def test_structure(self, n, m, k):
        sys = op_rel_entr_epi_cone(n, m, k)
        assert sys.block_sizes() == [2 * n] * (m + k)
        assert sys.inputs == ["X", "Y", "T"]
        expected = {"Z0"} | {f"Z{i}" for i in range(1, k + 1)} | {f"T{j}" for j in range(1, m + 1)}
        assert set(sys.auxiliaries) == expected
        assert len(sys.equalities) == 2
        sys.validate()

    def test_scalar_blocks_are_2x2(self):
        assert set(op_rel_entr_epi_cone(1, 4, 4).block_sizes()) == {2}

    def test_complex_validates(self):
        op_rel_entr_epi_cone(2, 2, 2, COMPLEX).validate(seed=3)

    def test_identity_member(self):
        res = feasibility(op_rel_entr_epi_cone(2, 2, 2), {"X": np.eye(2), "Y": np.eye(2), "T": np.zeros((2, 2))})
        assert res.shift <= 1e-7

    def test_scalar_relative_entropy(self):
        sys = op_rel_entr_epi_cone(1, 3, 3)
        assert feasibility(sys, {"X": 1.0, "Y": math.e, "T": -1.0 + 1e-6}).feasible
        assert not feasibility(sys, {"X": 1.0, "Y": math.e, "T": -1.01}).feasible

    def test_minimize_t(self):
        res = optimize(op_rel_entr_epi_cone(1, 3, 3), {"T": 1.0}, {"X": 1.0, "Y": math.e})
        assert abs(res.value + 1.0) <= 2e-8

    @pytest.mark.parametrize("n,m,k", [(2, 2, 2), (3, 3, 1)])
    def test_matrix_boundary(self, rng, n, m, k):
        X, Y = random_pd(rng, n), random_pd(rng, n)
        T = -rmk_perspective(Y, X, m, k)
        sys = op_rel_entr_epi_cone(n, m, k)
        assert feasibility(sys, {"X": X, "Y": Y, "T": T + 1e-4 * np.eye(n)}).feasible
        assert not feasibility(sys, {"X": X, "Y": Y, "T": T - 1e-4 * np.eye(n)}).feasible

    def test_soundness_sweep(self):
        rng = np.random.default_rng(7)
        for trial in range(8):
            n, m, k = rng.integers(1, 4), rng.integers(1, 4), rng.integers(0, 4)
            X, Y = random_pd(rng, n), random_pd(rng, n)
            P = rmk_perspective(Y, X, m, k)
            delta = rng.choice([-1, 1]) * 1e-3
            T = -P + delta * np.eye(n)
            oracle = check_membership(X, Y, T, m, k)
            sdp = feasibility(op_rel_entr_epi_cone(n, m, k), {"X": X, "Y": Y, "T": T}).feasible
            assert oracle == sdp == (delta > 0), (trial, n, m, k)


class TestMatrixHypograph:
    def test_identity(self):
        res = feasibility(matrix_hypograph_rmk(2, 2, 2), {"Y": np.eye(2), "U": np.zeros((2, 2))})
        assert res.shift <= 1e-7

    def test_diagonal_boundary(self):
        sys = matrix_hypograph_rmk(2, 1, 1)
        assert feasibility(sys, {"Y": np.diag([4.0, 1.0]), "U": np.diag([4 / 3, 0.0])}).shift <= 1e-7
        assert not feasibility(sys, {"Y": np.diag([4.0, 1.0]), "U": np.diag([4 / 3, 0.0]) + 1e-3 * np.eye(2)}).feasible

    def test_random(self, rng):
        Y = random_pd(rng, 2)
        R = mfun(Y, lambda w: eval_rmk(log_approximant(2, 2), w))
        sys = matrix_hypograph_rmk(2, 2, 2)
        assert feasibility(sys, {"Y": Y, "U": R - 1e-4 * np.eye(2)}).feasible
        assert not feasibility(sys, {"Y": Y, "U": R + 1e-4 * np.eye(2)}).feasible


class TestCertificate:
    def test_identity(self):
        cert = build_certificate(np.eye(2), np.eye(2), 2, 3)
        for name, val in cert.assignments.items():
            expected = np.eye(2) if name.startswith("Z") else np.zeros((2, 2))
            np.testing.assert_allclose(val, expected, atol=1e-15)

    def test_scalar_chain(self):
        cert = build_certificate([[1.0]], [[4.0]], 1, 2)
        vals = [cert.assignments[f"Z{i}"][0, 0] for i in range(3)]
        np.testing.assert_allclose(vals, [4, 2, math.sqrt(2)], rtol=1e-14)

    def test_blocks_hold(self, rng):
        X, Y = random_pd(rng, 3, True), random_pd(rng, 3, True)
        cert = build_certificate(X, Y, 3, 2)
        T = certificate_T(X, Y, 3, 2)
        sys = op_rel_entr_epi_cone(3, 3, 2, COMPLEX)
        a = cert.full_assignment(X, Y, T)
        assert sys.min_block_eigenvalue(a) >= -1e-9
        assert sys.equality_residual(a) <= 1e-9

    def test_T_matches_oracle(self, rng):
        X, Y = random_pd(rng, 3), random_pd(rng, 3)
        T = certificate_T(X, Y, 3, 2)
        P = rmk_perspective(Y, X, 3, 2)
        assert np.linalg.norm(T + P) <= 1e-9 * np.linalg.norm(P)

    def test_non_pd(self):
        with pytest.raises(DomainError):
            build_certificate(np.diag([1.0, -1.0]), np.eye(2), 1, 1)


class TestMembership:
    def test_identity(self):
        for method in ("oracle", "certificate"):
            assert check_membership(np.eye(2), np.eye(2), np.zeros((2, 2)), 2, 2, method)
            assert not check_membership(np.eye(2), np.eye(2), -1e-4 * np.eye(2), 2, 2, method)

    def test_agreement_sweep(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            m, k = int(rng.integers(1, 4)), int(rng.integers(0, 4))
            X, Y = random_pd(rng, n, bool(rng.integers(2))), random_pd(rng, n)
            delta = rng.choice([-1e-3, 1e-3])
            T = -rmk_perspective(Y, X, m, k) + delta * np.eye(n)
            a = check_membership(X, Y, T, m, k, "oracle")
            b = check_membership(X, Y, T, m, k, "certificate")
            assert a == b == (delta > 0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            check_membership(np.eye(1), np.eye(1), np.zeros((1, 1)), 1, 1, "magic")

    def test_approaches_relative_entropy(self, rng):
        X, Y = random_pd(rng, 3), random_pd(rng, 3)
        err = np.linalg.norm(-rmk_perspective(Y, X, 5, 5) - d_op(X, Y))
        assert err <= 1e-8


class TestConcavityAndMonotonicity:
    def test_joint_concavity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            X1, X2, Y1, Y2 = (random_pd(rng, 3) for _ in range(4))
            m, k = 2, 2
            mid = rmk_perspective(0.5 * (X1 + X2), 0.5 * (Y1 + Y2), m, k)
            avg = 0.5 * rmk_perspective(X1, Y1, m, k) + 0.5 * rmk_perspective(X2, Y2, m, k)
            assert lam_min(mid - avg) >= -1e-9

    def test_monotone_first_argument(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            X, V2 = random_pd(rng, 3), random_pd(rng, 3)
            G = rng.standard_normal((3, 3))
            V1 = V2 + G @ G.T
            diff = rmk_perspective(V1, X, 3, 0) - rmk_perspective(V2, X, 3, 0)
            assert lam_min(diff) >= -1e-9
