"""Quantum relative entropy, entropy and trace-log constructions.

The quantum relative entropy is a linear image of the operator relative
entropy of Kronecker lifts,

    D(A||B) = phi(D_op(A (x) I || I (x) conj(B))),   phi(Z) = w* Z w,

with w the vectorized identity.  Every system here is built from the
geometric-mean chain and perspective blocks of ``cone_factory``; the
"reduced" relative entropy system applies phi inside each perspective block,
turning the 2n^2 blocks into scalar hypographs of size n^2 + 1.
"""

from dataclasses import dataclass

import numpy as np

from .cone_factory import add_relative_entropy_core, d_op, geomean_block
from .errors import DomainError, ShapeError
from .hermitian import hermitian, is_psd, kron, logm, phi_map, require_pd, vec_identity
from .lmi import COMPLEX, REAL, Affine, LinearMatrixSystem, bmat
from .quadrature import gauss_legendre

FULL = "full"
REDUCED = "reduced"


@dataclass(frozen=True)
class DensityLikeMatrix:
    """A Hermitian matrix flagged positive definite and optionally unit trace."""

    matrix: np.ndarray
    positive: bool = True
    unit_trace: bool = False

    def __post_init__(self):
        M = hermitian(self.matrix)
        object.__setattr__(self, "matrix", M)
        if self.positive:
            require_pd(M, "density-like matrix")
        if self.unit_trace and abs(np.trace(M) - 1.0) > 1e-12:
            raise DomainError(f"trace is {np.real(np.trace(M))!r}, expected 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def normalized(cls, M) -> "DensityLikeMatrix":
        M = hermitian(M)
        return cls(M / np.real(np.trace(M)), True, True)


def _pair(A, B):
    A = require_pd(A, "A")
    B = require_pd(B, "B")
    if A.shape != B.shape:
        raise ShapeError(f"A has shape {A.shape} but B has shape {B.shape}")
    return A, B


def qre_oracle(A, B) -> float:
    """D(A||B) = Tr[A (log A - log B)] by eigendecomposition."""
    A, B = _pair(A, B)
    return float(np.real(np.trace(A @ (logm(A) - logm(B)))))


def entropy_oracle(rho) -> float:
    """S(rho) = -Tr[rho log rho]."""
    rho = require_pd(rho, "rho")
    return float(-np.real(np.trace(rho @ logm(rho))))


def trace_logm_oracle(sigma, rho) -> float:
    """Tr[sigma log rho]."""
    rho = require_pd(rho, "rho")
    return float(np.real(np.trace(hermitian(sigma) @ logm(rho))))


def lifted_pair(A, B):
    """(A (x) I, I (x) conj(B))."""
    A, B = _pair(A, B)
    n = A.shape[0]
    return kron(A, np.eye(n)), kron(np.eye(n), np.conj(B))


def lift_identity_residual(A, B) -> float:
    """|D(A||B) - phi(D_op(A (x) I || I (x) conj(B)))|."""
    X, Y = lifted_pair(A, B)
    return abs(qre_oracle(A, B) - phi_map(d_op(X, Y)))


def _check_sizes(n, m, k):
    if n < 1 or m < 1 or k < 0:
        raise ValueError("need n >= 1, m >= 1, k >= 0")


def quantum_rel_entr_epigraph(n: int, m: int, k: int, mode: str = FULL,
                              field: str = COMPLEX) -> LinearMatrixSystem:
    """System in (A, B, tau) approximating D(A||B) <= tau.

    ``full`` applies the operator relative entropy cone at dimension n^2 to
    (A (x) I, I (x) conj(B)) and bounds phi of its output: k geometric-mean
    and m perspective blocks of size 2n^2.  ``reduced`` keeps the k chain
    blocks and replaces each perspective block by the scalar hypograph
    tau_j <= w* P_{f_t}(Z_k, A (x) I) w, a block of size n^2 + 1.  Both add
    one 1 x 1 block tau + 2^k sum_j w_j tau_j >= 0 (with tau_j = phi(T_j) in
    full mode).  With ``field`` real the conjugation of B is skipped.
    """
    _check_sizes(n, m, k)
    if mode not in (FULL, REDUCED):
        raise ValueError(f"mode must be {FULL!r} or {REDUCED!r}")
    sys = LinearMatrixSystem(f"quantum_rel_entr_epigraph(n={n}, m={m}, k={k}, {mode})")
    A = sys.add_variable("A", n, field, "input")
    B = sys.add_variable("B", n, field, "input")
    tau = sys.add_variable("tau", 1, REAL, "input")
    I = np.eye(n)
    X = A.kron_right(I)
    Y = (B.conj() if field == COMPLEX else B).kron_left(I)
    rule = gauss_legendre(m)
    w = vec_identity(n).reshape(-1, 1)
    scale = 2.0**k
    if mode == FULL:
        Ts = add_relative_entropy_core(sys, X, Y, m, k, field)
        total = tau
        for wj, Tj in zip(rule.weights, Ts):
            total = total + Tj.map(lambda V: np.full((1, 1), phi_map(V))) * (scale * float(wj))
        sys.add_block("phi bound", total)
        return sys
    N = n * n
    Zprev = Y
    for i in range(1, k + 1):
        Zi = sys.add_variable(f"Z{i}", N, field)
        sys.add_block(f"geomean {i - 1}", geomean_block(X, Zprev, Zi))
        Zprev = Zi
    total = tau
    Xw = X.right(w)
    wXw = X.left(w.T).right(w)
    for j, t in enumerate(rule.nodes, start=1):
        t = float(t)
        tj = sys.add_variable(f"tau{j}", 1, REAL)
        sys.add_block(f"scalar perspective {j}",
                      bmat([[X + (Zprev - X) * t, Xw], [Xw.H, wXw - tj * t]]))
        total = total + tj * (scale * float(rule.weights[j - 1]))
    sys.add_block("phi bound", total)
    return sys


def quantum_entr_hypograph(n: int, m: int, k: int, field: str = COMPLEX) -> LinearMatrixSystem:
    """System in (rho, tau) approximating tau <= S(rho).

    (rho, I, T) lies in the operator relative entropy cone, T >= rho log rho
    approximately, and tau <= -Tr T = 2^k sum_j w_j Tr T_j.
    """
    _check_sizes(n, m, k)
    sys = LinearMatrixSystem(f"quantum_entr_hypograph(n={n}, m={m}, k={k})")
    rho = sys.add_variable("rho", n, field, "input")
    tau = sys.add_variable("tau", 1, REAL, "input")
    Ts = add_relative_entropy_core(sys, rho, Affine(np.eye(n)), m, k, field)
    w = gauss_legendre(m).weights
    total = -tau
    for wj, Tj in zip(w, Ts):
        total = total + Tj.map(lambda V: np.full((1, 1), np.real(np.trace(V)))) * (2.0**k * float(wj))
    sys.add_block("trace bound", total)
    return sys


def trace_logm_epigraph(sigma, n: int, m: int, k: int, field: str = COMPLEX) -> LinearMatrixSystem:
    """System in (rho, tau) approximating tau <= Tr[sigma log rho] for fixed sigma >= 0.

    The core with X = I bounds U = 2^k sum_j w_j T_j <= r_{m,k}(rho); pairing
    with sigma gives tau <= Re Tr[sigma U].  Blocks: k chain and m
    perspective blocks of size 2n, plus one 1 x 1 block.
    """
    _check_sizes(n, m, k)
    sigma = hermitian(sigma)
    if sigma.shape != (n, n):
        raise ShapeError(f"sigma must be {n} x {n}")
    if not is_psd(sigma, 1e-12):
        raise DomainError("sigma must be positive semidefinite")
    sys = LinearMatrixSystem(f"trace_logm_epigraph(n={n}, m={m}, k={k})")
    rho = sys.add_variable("rho", n, field, "input")
    tau = sys.add_variable("tau", 1, REAL, "input")
    Ts = add_relative_entropy_core(sys, Affine(np.eye(n)), rho, m, k, field)
    w = gauss_legendre(m).weights
    total = -tau
    for wj, Tj in zip(w, Ts):
        total = total + Tj.map(lambda V: np.full((1, 1), np.real(np.trace(sigma @ V)))) * (2.0**k * float(wj))
    sys.add_block("trace pairing", total)
    return sys


def _field_of(*mats):
    return COMPLEX if any(np.iscomplexobj(M) and np.any(np.imag(M)) for M in mats) else REAL


def qre_boundary(A, B, m: int, k: int, mode: str = REDUCED, **solver_kwargs) -> float:
    """tau*(A, B): the smallest feasible tau, found by minimizing tau directly."""
    from .sdp import optimize

    A, B = _pair(A, B)
    sys = quantum_rel_entr_epigraph(A.shape[0], m, k, mode, _field_of(A, B))
    res = optimize(sys, {"tau": 1.0}, {"A": A, "B": B}, "min", **solver_kwargs)
    return res.value


def qre_feasible(A, B, tau: float, m: int, k: int, mode: str = REDUCED, **solver_kwargs) -> bool:
    """Is (A, B, tau) feasible for the approximate epigraph?"""
    from .sdp import feasibility

    A, B = _pair(A, B)
    sys = quantum_rel_entr_epigraph(A.shape[0], m, k, mode, _field_of(A, B))
    return feasibility(sys, {"A": A, "B": B, "tau": tau}, **solver_kwargs).feasible
