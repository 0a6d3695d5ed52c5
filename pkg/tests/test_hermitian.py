import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padesdp.errors import DomainError, ShapeError
from padesdp.hermitian import (
    eig,
    geometric_mean,
    hermitian,
    is_psd,
    kron,
    logm,
    matrix_function,
    nc_perspective,
    phi_map,
    sqrtm,
)
from oracles import mfun, random_pd


class TestEig:
    def test_identity(self):
        w, _ = eig(np.eye(3))
        np.testing.assert_allclose(w, [1, 1, 1])

    def test_diagonal_sorted(self):
        w, _ = eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [1, 2, 3], atol=1e-15)

    def test_random_reconstruction(self, rng):
        G = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        M = hermitian(G + G.conj().T)
        w, V = eig(M)
        rel = np.linalg.norm(V @ np.diag(w) @ V.conj().T - M) / np.linalg.norm(M)
        assert rel <= 1e-12
        assert np.max(np.abs(V.conj().T @ V - np.eye(6))) <= 1e-12
        assert np.all(np.diff(w) >= 0)

    def test_matches_lapack(self, rng):
        G = rng.standard_normal((8, 8))
        M = G + G.T
        np.testing.assert_allclose(eig(M).eigenvalues, np.linalg.eigvalsh(M), atol=1e-12)

    def test_deterministic(self, rng):
        M = random_pd(rng, 5, True)
        a, b = eig(M), eig(M)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)

    def test_symmetrizes_on_build(self):
        M = np.array([[1.0, 2.0], [0.0, 1.0]])
        H = hermitian(M)
        np.testing.assert_array_equal(H, H.conj().T)

    def test_rejects_nonsquare(self):
        with pytest.raises(ShapeError):
            hermitian(np.ones((2, 3)))


class TestMatrixFunction:
    def test_log_identity(self):
        np.testing.assert_allclose(logm(np.eye(4)), 0.0, atol=1e-15)

    def test_sqrt_diagonal(self):
        np.testing.assert_allclose(sqrtm(np.diag([1.0, 4.0])), np.diag([1.0, 2.0]), atol=1e-15)

    def test_identity_function(self, rng):
        M = random_pd(rng, 4)
        np.testing.assert_allclose(matrix_function(M, lambda w: w), M, atol=1e-12)

    def test_commutes(self, rng):
        M = random_pd(rng, 5, True)
        F = logm(M)
        assert np.linalg.norm(F @ M - M @ F) <= 1e-10 * np.linalg.norm(M)

    def test_domain_error_reports_eigenvalue(self):
        with pytest.raises(DomainError, match="-1"):
            logm(np.diag([1.0, -1.0]))

    def test_against_lapack_oracle(self, rng):
        M = random_pd(rng, 5, True)
        np.testing.assert_allclose(logm(M), mfun(M, np.log), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 10_000))
    def test_spectral_mapping(self, n, seed):
        M = random_pd(np.random.default_rng(seed), n)
        w = eig(M).eigenvalues
        np.testing.assert_allclose(eig(logm(M)).eigenvalues, np.log(w), atol=1e-12)


class TestPsd:
    def test_identity(self):
        assert is_psd(np.eye(2), 0.0)

    def test_indefinite(self):
        assert not is_psd(np.diag([1.0, -1.0]), 1e-9)

    def test_hypograph_block_boundary(self):
        x, t = 2.0, 0.5
        T = (x - 1) / (t * (x - 1) + 1)
        block = np.array([[x - 1 - T, -np.sqrt(t) * T], [-np.sqrt(t) * T, 1 - t * T]])
        assert is_psd(block, 1e-12)
        assert abs(np.linalg.eigvalsh(block)[0]) <= 1e-12


class TestGeometricMean:
    def test_equal_arguments(self, rng):
        A = random_pd(rng, 3)
        for h in (0.25, 0.5, 0.75):
            np.testing.assert_allclose(geometric_mean(A, A, h), A, atol=1e-12)

    def test_scalars(self):
        assert geometric_mean([[4.0]], [[9.0]], 0.5)[0, 0] == pytest.approx(6.0, abs=1e-14)

    def test_nesting(self, rng):
        A, B = random_pd(rng, 4), random_pd(rng, 4)
        direct = geometric_mean(A, B, 0.25)
        nested = geometric_mean(A, geometric_mean(A, B, 0.5), 0.5)
        np.testing.assert_allclose(direct, nested, atol=1e-10)

    def test_symmetry(self, rng):
        A, B = random_pd(rng, 3, True), random_pd(rng, 3, True)
        np.testing.assert_allclose(geometric_mean(A, B, 0.25), geometric_mean(B, A, 0.75), atol=1e-10)

    def test_block_characterization(self, rng):
        A, B = random_pd(rng, 3), random_pd(rng, 3)
        G = geometric_mean(A, B, 0.5)
        assert np.linalg.eigvalsh(np.block([[A, G], [G, B]]))[0] >= -1e-9

    def test_non_pd(self):
        with pytest.raises(DomainError):
            geometric_mean(np.diag([1.0, 0.0]), np.eye(2))


class TestPerspective:
    def test_log_equal(self, rng):
        X = random_pd(rng, 3)
        np.testing.assert_allclose(nc_perspective(np.log, X, X), 0.0, atol=1e-12)

    def test_scalar_log(self):
        assert nc_perspective(np.log, [[np.e]], [[1.0]])[0, 0] == pytest.approx(1.0, abs=1e-14)

    def test_sqrt_is_geometric_mean(self, rng):
        X, Y = random_pd(rng, 4, True), random_pd(rng, 4, True)
        np.testing.assert_allclose(nc_perspective(np.sqrt, X, Y), geometric_mean(Y, X, 0.5), atol=1e-10)

    def test_homogeneous(self, rng):
        X, Y = random_pd(rng, 3), random_pd(rng, 3)
        P = nc_perspective(np.log, X, Y)
        np.testing.assert_allclose(nc_perspective(np.log, 3.5 * X, 3.5 * Y), 3.5 * P,
                                   rtol=1e-12, atol=1e-12 * np.abs(P).max())


class TestPhiMap:
    def test_identity(self):
        assert phi_map(np.eye(4)) == pytest.approx(2.0)

    def test_kron_trace(self, rng):
        X = hermitian(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        Y = hermitian(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        assert abs(phi_map(kron(X, Y)) - np.real(np.trace(X @ Y.T))) <= 1e-12

    def test_positive(self, rng):
        assert phi_map(random_pd(rng, 9, True)) >= 0.0

    def test_not_square_dimension(self):
        with pytest.raises(ShapeError):
            phi_map(np.eye(3))
