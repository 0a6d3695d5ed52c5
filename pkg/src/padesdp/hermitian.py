"""Dense Hermitian linear algebra.

Matrices are plain numpy arrays.  ``hermitian`` symmetrizes its input so that
every value produced here is exactly Hermitian; real symmetric matrices stay
real.  The eigensolver is a cyclic Jacobi method with threshold sweeps, which
is accurate to working precision for the small matrices used throughout the
package.
"""

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, ShapeError

MAX_SWEEPS = 30


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # nondecreasing
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors


def hermitian(M) -> np.ndarray:
    """Return (M + M^*)/2 as a float or complex array.

    Scalars and 1-d inputs of length one are promoted to 1x1 matrices.
    """
    A = np.asarray(M)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ShapeError(f"expected a nonempty square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        A = A.astype(complex)
        H = 0.5 * (A + A.conj().T)
        if not np.any(H.imag):
            return np.ascontiguousarray(H.real)
        return H
    A = A.astype(float)
    return 0.5 * (A + A.T)


def _off_norm(A):
    off = A - np.diag(np.diag(A))
    return np.sqrt(np.sum(np.abs(off) ** 2))


def eig(M) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of the pivot entry with a diagonal
    unitary and then applies a real plane rotation.  The first three sweeps
    skip pivots below a threshold proportional to the off-diagonal mass.
    """
    A = hermitian(M).copy()
    n = A.shape[0]
    is_complex = np.iscomplexobj(A)
    V = np.eye(n, dtype=A.dtype)
    scale = np.sqrt(np.sum(np.abs(A) ** 2))
    if n == 1 or scale == 0.0:
        return EigDecomposition(np.real(np.diag(A)).copy(), V)
    eps = np.finfo(float).eps
    target = eps * scale
    for sweep in range(MAX_SWEEPS):
        off = _off_norm(A)
        if off <= target:
            break
        thresh = 0.2 * off / n**2 if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                # negligible pivot after the warm-up sweeps: drop it
                if sweep > 3 and mag <= eps * 0.01 * min(abs(app), abs(aqq)):
                    A[p, q] = A[q, p] = 0.0
                    continue
                if mag <= thresh:
                    continue
                theta = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = np.conj(apq / mag) if is_complex else np.sign(apq)
                G = np.array([[c, s], [-s * ph, c * ph]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
    else:
        off = _off_norm(A)
        if off > target:
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps "
                f"(off-diagonal norm {off:.3e})",
                residual=off,
            )
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return EigDecomposition(w[order].copy(), V[:, order].copy())


def eigvalsh(M) -> np.ndarray:
    return eig(M).eigenvalues


def from_eig(w, V) -> np.ndarray:
    """Assemble V diag(w) V^*."""
    return hermitian((V * w) @ V.conj().T)


def matrix_function(M, f: Callable, positive_domain: bool = True) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``f`` must accept a numpy array of eigenvalues.  With ``positive_domain``
    set, any eigenvalue <= 0 raises DomainError.
    """
    w, V = eig(M)
    if positive_domain and w[0] <= 0.0:
        raise DomainError(f"matrix function needs a positive definite argument; smallest eigenvalue {w[0]:.6e}")
    fw = np.asarray(f(w), dtype=float)
    return from_eig(fw, V)


def sqrtm(M) -> np.ndarray:
    return matrix_function(M, np.sqrt)


def inv_sqrtm(M) -> np.ndarray:
    return matrix_function(M, lambda w: 1.0 / np.sqrt(w))


def logm(M) -> np.ndarray:
    return matrix_function(M, np.log)


def invm(M) -> np.ndarray:
    return matrix_function(M, lambda w: 1.0 / w)


def powm(M, h: float) -> np.ndarray:
    return matrix_function(M, lambda w: w**h)


def lambda_min(M) -> float:
    return float(eig(M).eigenvalues[0])


def is_psd(M, tol: float = 1e-9) -> bool:
    """True iff lambda_min(M) >= -tol * max(1, ||M||_F)."""
    H = hermitian(M)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(H) ** 2))))
    return lambda_min(H) >= -tol * scale


def require_pd(M, name: str = "matrix") -> np.ndarray:
    H = hermitian(M)
    lmin = lambda_min(H)
    if lmin <= 0.0:
        raise DomainError(f"{name} must be positive definite; smallest eigenvalue {lmin:.6e}")
    return H


def geometric_mean(A, B, h: float = 0.5) -> np.ndarray:
    """Weighted geometric mean A #_h B = A^{1/2} (A^{-1/2} B A^{-1/2})^h A^{1/2}."""
    if not 0.0 <= h <= 1.0:
        raise DomainError(f"weight h must lie in [0, 1], got {h}")
    A = require_pd(A, "A")
    B = require_pd(B, "B")
    if A.shape != B.shape:
        raise ShapeError(f"shape mismatch {A.shape} vs {B.shape}")
    w, V = eig(A)
    Ah = from_eig(np.sqrt(w), V)
    Aih = from_eig(1.0 / np.sqrt(w), V)
    C = powm(Aih @ B @ Aih, h)
    return hermitian(Ah @ C @ Ah)


def nc_perspective(g: Callable, X, Y) -> np.ndarray:
    """Noncommutative perspective P_g(X, Y) = Y^{1/2} g(Y^{-1/2} X Y^{-1/2}) Y^{1/2}."""
    X = require_pd(X, "X")
    Y = require_pd(Y, "Y")
    if X.shape != Y.shape:
        raise ShapeError(f"shape mismatch {X.shape} vs {Y.shape}")
    w, V = eig(Y)
    Yh = from_eig(np.sqrt(w), V)
    Yih = from_eig(1.0 / np.sqrt(w), V)
    C = matrix_function(Yih @ X @ Yih, g)
    return hermitian(Yh @ C @ Yh)


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A), np.asarray(B))


def vec_identity(n: int) -> np.ndarray:
    """Column-stacked vectorization of the n x n identity."""
    return np.eye(n).reshape(n * n)


def phi_map(Z) -> float:
    """phi(Z) = w^* Z w with w the vectorized identity; phi(X kron Y) = Tr[X Y^T]."""
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {Z.shape}")
    n = int(round(np.sqrt(Z.shape[0])))
    if n * n != Z.shape[0]:
        raise ShapeError(f"dimension {Z.shape[0]} is not a perfect square")
    idx = np.arange(n) * (n + 1)
    return float(np.real(np.sum(Z[np.ix_(idx, idx)])))
