import math

import numpy as np
import pytest

from padesdp.errors import DomainError, ShapeError
from padesdp.lmi import COMPLEX, REAL
from padesdp.quantum import (
    FULL,
    REDUCED,
    DensityLikeMatrix,
    entropy_oracle,
    lift_identity_residual,
    qre_boundary,
    qre_feasible,
    qre_oracle,
    quantum_entr_hypograph,
    quantum_rel_entr_epigraph,
    trace_logm_epigraph,
    trace_logm_oracle,
)
from padesdp.scalar_approx import error_bound_log
from padesdp.sdp.api import feasibility
from oracles import qre, random_density

KL = 0.5 * math.log(9 / 8)
A_DIAG = np.diag([0.5, 0.5])
B_DIAG = np.diag([1 / 3, 2 / 3])


class TestDensityLike:
    def test_normalized(self):
        rho = DensityLikeMatrix.normalized(np.diag([1.0, 3.0]))
        assert rho.dim == 2 and rho.unit_trace
        assert np.trace(rho.matrix) == pytest.approx(1.0)

    def test_rejects_singular(self):
        with pytest.raises(DomainError):
            DensityLikeMatrix(np.diag([1.0, 0.0]))

    def test_rejects_trace(self):
        with pytest.raises(DomainError):
            DensityLikeMatrix(np.eye(2), unit_trace=True)


class TestOracles:
    def test_equal(self):
        assert qre_oracle(np.eye(3) / 3, np.eye(3) / 3) == pytest.approx(0.0, abs=1e-15)

    def test_classical(self):
        assert qre_oracle(A_DIAG, B_DIAG) == pytest.approx(KL, abs=1e-14)
        assert KL == pytest.approx(0.0588915, abs=1e-7)

    def test_against_independent(self, rng):
        A, B = random_density(rng, 3), random_density(rng, 3)
        assert qre_oracle(A, B) == pytest.approx(qre(A, B), abs=1e-12)

    def test_nonnegative(self, rng):
        for _ in range(20):
            assert qre_oracle(random_density(rng, 3), random_density(rng, 3)) >= -1e-12

    def test_entropy(self):
        assert entropy_oracle(np.eye(2) / 2) == pytest.approx(math.log(2))

    def test_trace_logm(self):
        assert trace_logm_oracle(np.diag([1.0, 0.0]), np.diag([math.e, 1.0])) == pytest.approx(1.0)

    def test_mismatch(self):
        with pytest.raises(ShapeError):
            qre_oracle(np.eye(2), np.eye(3))

    def test_non_pd(self):
        with pytest.raises(DomainError):
            qre_oracle(np.diag([1.0, -1.0]), np.eye(2))


class TestLifting:
    def test_identity(self):
        assert lift_identity_residual(np.eye(2) / 2, np.eye(2) / 2) <= 1e-15

    def test_diagonal(self):
        assert lift_identity_residual(A_DIAG, B_DIAG) <= 1e-12

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_complex(self, rng, n):
        assert lift_identity_residual(random_density(rng, n), random_density(rng, n)) <= 1e-9

    def test_mismatch(self):
        with pytest.raises(ShapeError):
            lift_identity_residual(np.eye(2), np.eye(3))


class TestRelEntrSystem:
    @pytest.mark.parametrize("n,m,k", [(2, 3, 3), (3, 2, 1)])
    def test_reduced_sizes(self, n, m, k):
        sizes = quantum_rel_entr_epigraph(n, m, k, REDUCED).block_sizes()
        assert sorted(sizes[:-1]) == sorted([2 * n * n] * k + [n * n + 1] * m)
        assert sizes[-1] == 1

    def test_full_sizes(self):
        sizes = quantum_rel_entr_epigraph(2, 3, 2, FULL).block_sizes()
        assert sizes == [8] * 5 + [1]

    def test_validates(self):
        quantum_rel_entr_epigraph(2, 2, 2, REDUCED, COMPLEX).validate()
        quantum_rel_entr_epigraph(2, 2, 2, FULL, COMPLEX).validate()

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            quantum_rel_entr_epigraph(2, 1, 1, "half")

    def test_identity(self):
        for mode in (FULL, REDUCED):
            res = feasibility(quantum_rel_entr_epigraph(2, 2, 2, mode, REAL),
                              {"A": np.eye(2) / 2, "B": np.eye(2) / 2, "tau": 0.0})
            assert res.shift <= 1e-7

    @pytest.mark.parametrize("mode", [FULL, REDUCED])
    def test_classical_margin(self, mode):
        assert qre_feasible(A_DIAG, B_DIAG, KL + 1e-3, 3, 3, mode)
        assert not qre_feasible(A_DIAG, B_DIAG, KL - 1e-3, 3, 3, mode)

    def test_modes_agree(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            A, B = random_density(rng, 2), random_density(rng, 2)
            tau = qre(A, B) + rng.choice([-1e-3, 1e-3])
            assert qre_feasible(A, B, tau, 2, 2, FULL) == qre_feasible(A, B, tau, 2, 2, REDUCED)

    def test_boundary_error(self, rng):
        for n in (2, 3):
            A, B = random_density(rng, n), random_density(rng, n)
            w = np.concatenate([np.linalg.eigvalsh(A), np.linalg.eigvalsh(B)])
            a = w.max() / w.min()
            bound = n * max(error_bound_log(a, 3, 3), error_bound_log(1 / a, 3, 3))
            assert abs(qre_boundary(A, B, 3, 3) - qre(A, B)) <= bound + 1e-7

    def test_joint_convexity(self):
        rng = np.random.default_rng(9)
        for _ in range(3):
            A1, A2, B1, B2 = (random_density(rng, 2) for _ in range(4))
            mid = qre_boundary(0.5 * (A1 + A2), 0.5 * (B1 + B2), 2, 2)
            avg = 0.5 * qre_boundary(A1, B1, 2, 2) + 0.5 * qre_boundary(A2, B2, 2, 2)
            assert mid <= avg + 1e-7


class TestEntropySystem:
    def test_sizes(self):
        assert quantum_entr_hypograph(2, 3, 2).block_sizes() == [4] * 5 + [1]

    def test_maximally_mixed(self):
        sys = quantum_entr_hypograph(2, 3, 3)
        assert feasibility(sys, {"rho": np.eye(2) / 2, "tau": math.log(2) - 1e-4}).feasible
        assert not feasibility(sys, {"rho": np.eye(2) / 2, "tau": math.log(2) + 1e-4}).feasible

    def test_nearly_pure(self):
        rho = np.diag([1.0, 0.0]) + 1e-8 * np.eye(2)
        rho /= np.trace(rho)
        assert not feasibility(quantum_entr_hypograph(2, 3, 3), {"rho": rho, "tau": 0.01}).feasible

    def test_negative_tau(self, rng):
        rho = random_density(rng, 2)
        assert feasibility(quantum_entr_hypograph(2, 2, 2), {"rho": rho, "tau": -1.0}).feasible


class TestTraceLogm:
    def test_identity(self):
        sys = trace_logm_epigraph(np.eye(2), 2, 2, 2)
        assert feasibility(sys, {"rho": np.eye(2), "tau": 0.0}).shift <= 1e-7
        assert not feasibility(sys, {"rho": np.eye(2), "tau": 1e-3}).feasible

    def test_diagonal(self):
        sys = trace_logm_epigraph(np.diag([1.0, 0.0]), 2, 3, 3, REAL)
        assert feasibility(sys, {"rho": np.diag([math.e, 1.0]), "tau": 0.99}).feasible
        assert not feasibility(sys, {"rho": np.diag([math.e, 1.0]), "tau": 1.01}).feasible

    def test_linear_in_sigma(self):
        from padesdp.sdp.api import optimize

        rho = np.diag([2.0, 0.5])
        sigma = np.array([[1.0, 0.2], [0.2, 0.5]])
        vals = []
        for s in (sigma, 2 * sigma):
            sys = trace_logm_epigraph(s, 2, 3, 3, REAL)
            vals.append(optimize(sys, {"tau": 1.0}, {"rho": rho}, "max").value)
        assert vals[1] == pytest.approx(2 * vals[0], abs=1e-7)
        assert vals[0] == pytest.approx(trace_logm_oracle(sigma, rho), abs=1e-6)

    def test_sigma_not_psd(self):
        with pytest.raises(DomainError):
            trace_logm_epigraph(np.diag([1.0, -1.0]), 2, 1, 1)

    def test_sigma_shape(self):
        with pytest.raises(ShapeError):
            trace_logm_epigraph(np.eye(3), 2, 1, 1)

    def test_sizes(self):
        assert trace_logm_epigraph(np.eye(3), 3, 2, 3).block_sizes() == [6] * 5 + [1]
