"""LMI systems for f_t, its perspectives, geometric-mean chains and the
approximate operator relative entropy cone.

The cone K^n_{m,k} is the set of (X, Y, T) with X, Y positive definite and

    -P_{r_{m,k}}(Y, X) <= T,   P_r(Y, X) = X^{1/2} r(X^{-1/2} Y X^{-1/2}) X^{1/2},

where r_{m,k} approximates log.  Its description uses the identity
P_{r_{m,k}}(Y, X) = 2^k P_{r_m}(X #_{2^-k} Y, X): a chain of k geometric-mean
blocks produces Z_k <= X #_{2^-k} Y, and m perspective blocks bound
T_j <= P_{f_{t_j}}(Z_k, X), tied together by sum_j w_j T_j = -2^{-k} T.
"""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .errors import DomainError
from .hermitian import geometric_mean, hermitian, is_psd, nc_perspective, require_pd
from .lmi import REAL, Affine, LinearMatrixSystem, bmat
from .quadrature import gauss_legendre
from .scalar_approx import eval_rmk, f_t, log_approximant


def _eye(n):
    return np.eye(n)


def ft_hypograph_block(X: Affine, T: Affine, t: float) -> Affine:
    """[[X - I - T, -sqrt(t) T], [-sqrt(t) T, I - t T]]; PSD iff f_t(X) >= T."""
    n = X.shape[0]
    st = np.sqrt(t)
    return bmat([[X - _eye(n) - T, -st * T], [-st * T, _eye(n) - t * T]])


def ft_perspective_block(X: Affine, Y: Affine, T: Affine, t: float) -> Affine:
    """[[X - Y - T, -sqrt(t) T], [-sqrt(t) T, Y - t T]]; PSD iff P_{f_t}(X, Y) >= T."""
    st = np.sqrt(t)
    return bmat([[X - Y - T, -st * T], [-st * T, Y - t * T]])


def harmonic_block(X: Affine, Y: Affine, T: Affine, t: float) -> Affine:
    """[[Y/t - T, -T], [-T, X/(1-t) - T]]; PSD iff ((1-t) X^{-1} + t Y^{-1})^{-1} >= T,
    i.e. the perspective of f_t^+ dominates T."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"the f_t^+ perspective needs t strictly inside (0, 1), got {t}")
    return bmat([[Y * (1.0 / t) - T, -T], [-T, X * (1.0 / (1.0 - t)) - T]])


def geomean_block(X: Affine, Zi: Affine, Zn: Affine) -> Affine:
    """[[Z_i, Z_{i+1}], [Z_{i+1}, X]]; PSD implies Z_{i+1} <= X #_{1/2} Z_i."""
    return bmat([[Zi, Zn], [Zn, X]])


def hypograph_ft(t: float, n: int, field: str = REAL) -> LinearMatrixSystem:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    sys = LinearMatrixSystem(f"hypograph_f_t(t={t:g})")
    X = sys.add_variable("X", n, field, "input")
    T = sys.add_variable("T", n, field, "input")
    sys.add_block("hypograph", ft_hypograph_block(X, T, t))
    return sys


def perspective_ft(t: float, n: int, field: str = REAL) -> LinearMatrixSystem:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    sys = LinearMatrixSystem(f"perspective_f_t(t={t:g})")
    X = sys.add_variable("X", n, field, "input")
    Y = sys.add_variable("Y", n, field, "input")
    T = sys.add_variable("T", n, field, "input")
    sys.add_block("perspective", ft_perspective_block(X, Y, T, t))
    return sys


def perspective_ft_plus(t: float, n: int, field: str = REAL) -> LinearMatrixSystem:
    sys = LinearMatrixSystem(f"perspective_f_t_plus(t={t:g})")
    X = sys.add_variable("X", n, field, "input")
    Y = sys.add_variable("Y", n, field, "input")
    T = sys.add_variable("T", n, field, "input")
    sys.add_block("harmonic", harmonic_block(X, Y, T, t))
    return sys


def geomean_chain(k: int, n: int, field: str = REAL) -> LinearMatrixSystem:
    """Feasible iff X #_{2^-k} Y >= V (for positive definite X, Y)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    sys = LinearMatrixSystem(f"geomean_chain(k={k})")
    X = sys.add_variable("X", n, field, "input")
    Y = sys.add_variable("Y", n, field, "input")
    V = sys.add_variable("V", n, field, "input")
    Z = [sys.add_variable(f"Z{i}", n, field) for i in range(k + 1)]
    sys.add_equality("Z0 = Y", Z[0] - Y)
    sys.add_equality(f"Z{k} = V", Z[k] - V)
    for i in range(k):
        sys.add_block(f"geomean {i}", geomean_block(X, Z[i], Z[i + 1]))
    return sys


def add_relative_entropy_core(sys: LinearMatrixSystem, X: Affine, Y: Affine, m: int, k: int,
                              field: str = REAL, prefix: str = "") -> List[Affine]:
    """Add the Z chain and the m perspective blocks bounding T_j <= P_{f_{t_j}}(Z_k, X).

    Z_0 is the expression Y itself.  Returns the T_j variables; the caller
    ties them to its output through sum_j w_j T_j.
    """
    n = X.shape[0]
    rule = gauss_legendre(m)
    Zprev = Y
    for i in range(1, k + 1):
        Zi = sys.add_variable(f"{prefix}Z{i}", n, field)
        sys.add_block(f"{prefix}geomean {i - 1}", geomean_block(X, Zprev, Zi))
        Zprev = Zi
    Ts = []
    for j, t in enumerate(rule.nodes, start=1):
        Tj = sys.add_variable(f"{prefix}T{j}", n, field)
        sys.add_block(f"{prefix}perspective {j}", ft_perspective_block(Zprev, X, Tj, float(t)))
        Ts.append(Tj)
    return Ts


def weighted_sum(exprs: List[Affine], weights) -> Affine:
    out = exprs[0] * float(weights[0])
    for e, w in zip(exprs[1:], weights[1:]):
        out = out + e * float(w)
    return out


def op_rel_entr_epi_cone(n: int, m: int, k: int, field: str = REAL) -> LinearMatrixSystem:
    """(X, Y, T) in K^n_{m,k}: variables X, Y, T, T1..Tm, Z0..Zk."""
    if n < 1 or m < 1 or k < 0:
        raise ValueError("need n >= 1, m >= 1, k >= 0")
    sys = LinearMatrixSystem(f"op_rel_entr_epi_cone(n={n}, m={m}, k={k})")
    X = sys.add_variable("X", n, field, "input")
    Y = sys.add_variable("Y", n, field, "input")
    T = sys.add_variable("T", n, field, "input")
    Z0 = sys.add_variable("Z0", n, field)
    sys.add_equality("Z0 = Y", Z0 - Y)
    Ts = add_relative_entropy_core(sys, X, Z0, m, k, field)
    w = gauss_legendre(m).weights
    sys.add_equality("sum w_j T_j = -2^-k T", weighted_sum(Ts, w) + T * 2.0**-k)
    return sys


def matrix_hypograph_rmk(n: int, m: int, k: int, field: str = REAL) -> LinearMatrixSystem:
    """(Y, U) with r_{m,k}(Y) >= U: the cone with X = I and T = -U."""
    sys = LinearMatrixSystem(f"matrix_hypograph_rmk(n={n}, m={m}, k={k})")
    Y = sys.add_variable("Y", n, field, "input")
    U = sys.add_variable("U", n, field, "input")
    Ts = add_relative_entropy_core(sys, Affine(np.eye(n)), Y, m, k, field)
    w = gauss_legendre(m).weights
    sys.add_equality("sum w_j T_j = 2^-k U", weighted_sum(Ts, w) - U * 2.0**-k)
    return sys


# oracles and certificates -------------------------------------------------

def rmk_perspective(Y, X, m: int, k: int) -> np.ndarray:
    """P_{r_{m,k}}(Y, X) = X^{1/2} r_{m,k}(X^{-1/2} Y X^{-1/2}) X^{1/2}."""
    approx = log_approximant(m, k)
    return nc_perspective(lambda w: eval_rmk(approx, w), Y, X)


def d_op(X, Y) -> np.ndarray:
    """Operator relative entropy -X^{1/2} log(X^{-1/2} Y X^{-1/2}) X^{1/2}."""
    return -nc_perspective(np.log, Y, X)


@dataclass
class MembershipCertificate:
    """Values of all auxiliary variables of op_rel_entr_epi_cone."""

    assignments: Dict[str, np.ndarray]

    def full_assignment(self, X, Y, T) -> Dict[str, np.ndarray]:
        out = dict(self.assignments)
        out.update({"X": hermitian(X), "Y": hermitian(Y), "T": hermitian(T)})
        return out


def build_certificate(X, Y, m: int, k: int, T=None) -> MembershipCertificate:
    """Auxiliary values realizing membership of (X, Y, T).

    Z_0 = Y, Z_{i+1} = X #_{1/2} Z_i and T_j = P_{f_{t_j}}(Z_k, X).  Without
    ``T`` these satisfy the system for T = -2^k sum_j w_j T_j, which equals
    -P_{r_{m,k}}(Y, X).  With ``T`` given, every T_j is lowered by
    D = 2^{-k} (P_{r_{m,k}}(Y, X) + T) so the equality holds; the blocks
    then hold exactly when D is positive semidefinite.
    """
    X = require_pd(X, "X")
    Y = require_pd(Y, "Y")
    rule = gauss_legendre(m)
    Z = [Y]
    for _ in range(k):
        Z.append(geometric_mean(X, Z[-1], 0.5))
    Ts = [nc_perspective(lambda w, t=float(t): f_t(t, w), Z[-1], X) for t in rule.nodes]
    if T is not None:
        P = -(2.0**k) * sum(w * Tj for w, Tj in zip(rule.weights, Ts))
        D = 2.0**-k * (hermitian(T) - P)
        Ts = [hermitian(Tj - D) for Tj in Ts]
    out = {f"Z{i}": Zi for i, Zi in enumerate(Z)}
    out.update({f"T{j}": Tj for j, Tj in enumerate(Ts, start=1)})
    return MembershipCertificate(out)


def certificate_T(X, Y, m: int, k: int) -> np.ndarray:
    """T = -2^k sum_j w_j T_j from the certificate (equals -P_{r_{m,k}}(Y, X))."""
    cert = build_certificate(X, Y, m, k)
    w = gauss_legendre(m).weights
    return hermitian(-(2.0**k) * sum(wj * cert.assignments[f"T{j}"] for j, wj in enumerate(w, start=1)))


def check_membership(X, Y, T, m: int, k: int, method: str = "oracle", tol: float = 1e-9) -> bool:
    """Is (X, Y, T) in K^n_{m,k}?

    ``oracle`` tests T + P_{r_{m,k}}(Y, X) >= 0 through matrix functions;
    ``certificate`` builds the explicit auxiliary values and checks every
    block of the system.
    """
    X = require_pd(X, "X")
    Y = require_pd(Y, "Y")
    T = hermitian(T)
    if method == "oracle":
        return is_psd(T + rmk_perspective(Y, X, m, k), tol)
    if method == "certificate":
        n = X.shape[0]
        field = "complex" if any(np.iscomplexobj(A) for A in (X, Y, T)) else REAL
        sys = op_rel_entr_epi_cone(n, m, k, field)
        cert = build_certificate(X, Y, m, k, T)
        assign = cert.full_assignment(X, Y, T)
        scale = max(1.0, float(np.max(np.abs(T))), float(np.max(np.abs(X))), float(np.max(np.abs(Y))))
        return sys.is_satisfied(assign, tol, eq_tol=1e-9 * scale * 2.0**k)
    raise ValueError(f"unknown method {method!r}")
