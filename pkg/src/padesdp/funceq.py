"""Approximations accelerated by a functional equation P_g o Phi = P_g.

Phi(x, y) = (P_{h1}(x, y), P_{h2}(x, y)) is a mean iteration built from two
positive operator monotone functions.  When it contracts (x, y) towards the
diagonal, the composed approximant

    P_{r_{m,k}} = P_{r_m^+} o Phi^(k)

approximates P_g far better than r_m^+ alone.  Two iterations are provided:
the logarithmic mean (x - y)/(log x - log y) and the arithmetic-geometric
mean.
"""

from dataclasses import dataclass, field
from math import ceil, log, log2, sqrt
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .hermitian import geometric_mean, hermitian, invm, nc_perspective, require_pd
from .lmi import REAL, LinearMatrixSystem, bmat
from .quadrature import QuadratureRule, gauss_agm, gauss_logmean

AGM_RTOL = 1e-15


def agm(x, y) -> float:
    """Arithmetic-geometric mean: iterate ((x + y)/2, sqrt(xy)) to convergence."""
    x, y = float(x), float(y)
    if x <= 0.0 or y <= 0.0:
        raise DomainError(f"agm needs positive arguments, got ({x}, {y})")
    for _ in range(100):
        if abs(x - y) <= AGM_RTOL * max(x, y):
            break
        x, y = 0.5 * (x + y), sqrt(x * y)
    return 0.5 * (x + y)


def log_mean(x, y):
    """(x - y)/(log x - log y), equal to x on the diagonal.

    Written as y * (q - 1)/log q with q = x/y; near q = 1 the ratio is
    evaluated as u / log1p(u) with a series fallback to avoid cancellation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log_mean needs positive arguments")
    u = x / y - 1.0
    small = np.abs(u) < 1e-8
    us = np.where(small, 1.0, u)
    ratio = np.where(small, 1.0 + u / 2.0 - u * u / 12.0, us / np.log1p(us))
    out = y * ratio
    return float(out) if out.ndim == 0 else out


# -- emitters: affine expression bounded above by P_h(x, y) ------------------

def _emit_arith(sys, x, y, label):
    """(x + y)/2; affine, no block."""
    return (x + y) * 0.5


def _emit_geo(sys, x, y, label):
    """sqrt(xy) via s with [[x, s], [s, y]] PSD."""
    s = sys.add_variable(label, 1, REAL)
    sys.add_block(f"{label} geomean", bmat([[x, s], [s, y]]))
    return s


def _emit_half_geo_first(sys, x, y, label):
    """(x + sqrt(xy))/2."""
    return (x + _emit_geo(sys, x, y, label)) * 0.5


def _emit_half_geo_second(sys, x, y, label):
    """(y + sqrt(xy))/2."""
    return (y + _emit_geo(sys, x, y, label)) * 0.5


@dataclass(frozen=True)
class MeanIteration:
    """Phi = (P_{h1}, P_{h2}) together with the target P_g it preserves.

    ``h*_value`` and ``h*_slope`` are h_i(1) and h_i'(1); ``block_size*`` is
    the total size of the PSD blocks the emitter adds per layer; ``c`` and
    ``c0`` are the linear and (optional) quadratic contraction constants of
    |log(P_{h1}/P_{h2})| against |log(x/y)|.
    """

    name: str
    phi: Callable  # (x, y) -> (x', y'), vectorized over arrays
    target: Callable  # P_g(x, y)
    rule: Callable[[int], QuadratureRule]
    g0: float
    g1: float
    h1_value: float
    h1_slope: float
    h2_value: float
    h2_slope: float
    c: float
    c0: Optional[float]
    emit_h1: Callable = field(repr=False)
    emit_h2: Callable = field(repr=False)
    block_size1: int = 0
    block_size2: int = 0
    matrix_phi: Optional[Callable] = field(default=None, repr=False)
    matrix_target: Optional[Callable] = field(default=None, repr=False)

    @property
    def b(self) -> float:
        """max{h1'(1) + h2'(1), h1(1) + h2(1) - (h1'(1) + h2'(1))}."""
        s = self.h1_slope + self.h2_slope
        return max(s, self.h1_value + self.h2_value - s)

    def residual(self, x, y):
        """Relative residual |P_g(Phi(x, y)) - P_g(x, y)| / P_g(x, y)."""
        u, v = self.phi(x, y)
        ref = self.target(x, y)
        return np.abs(self.target(u, v) - ref) / np.abs(ref)


def _logmean_phi(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.sqrt(x * y)
    return 0.5 * (x + s), 0.5 * (y + s)


def _agm_phi(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * (x + y), np.sqrt(x * y)


def _logmean_matrix_phi(X, Y):
    G = geometric_mean(X, Y, 0.5)
    return hermitian(0.5 * (X + G)), hermitian(0.5 * (Y + G))


def _logmean_matrix_target(X, Y):
    def g(t):
        t = np.asarray(t, dtype=float)
        return log_mean(t, np.ones_like(t))

    return nc_perspective(g, X, Y)


def _agm_target(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.vectorize(agm, otypes=[float])(x, y)
    return float(out) if out.ndim == 0 else out


LOG_MEAN = MeanIteration(
    name="log-mean",
    phi=_logmean_phi,
    target=log_mean,
    rule=gauss_logmean,
    g0=0.0,
    g1=1.0,
    h1_value=1.0, h1_slope=0.75,
    h2_value=1.0, h2_slope=0.25,
    c=2.0,
    c0=None,
    emit_h1=_emit_half_geo_first,
    emit_h2=_emit_half_geo_second,
    block_size1=2,
    block_size2=2,
    matrix_phi=_logmean_matrix_phi,
    matrix_target=_logmean_matrix_target,
)

AGM = MeanIteration(
    name="agm",
    phi=_agm_phi,
    target=_agm_target,
    rule=gauss_agm,
    g0=0.0,
    g1=1.0,
    h1_value=1.0, h1_slope=0.5,
    h2_value=1.0, h2_slope=0.5,
    c=2.0,
    c0=8.0,
    emit_h1=_emit_arith,
    emit_h2=_emit_geo,
    block_size1=0,
    block_size2=2,
)

ITERATIONS = {LOG_MEAN.name: LOG_MEAN, AGM.name: AGM}


def _check_mk(m, k):
    if m < 1 or k < 0:
        raise ValueError("need m >= 1 and k >= 0")


def iterate_phi(it: MeanIteration, x, y, k: int):
    """Phi^(k)(x, y)."""
    for _ in range(k):
        x, y = it.phi(x, y)
    return x, y


def eval_rmk_phi(it: MeanIteration, m: int, k: int, x, y):
    """P_{r_m^+}(Phi^(k)(x, y)) = g0 y_k + (g1 - g0) sum_j w_j P_{f_tj^+}(x_k, y_k)."""
    _check_mk(m, k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("eval_rmk_phi needs positive arguments")
    xk, yk = iterate_phi(it, x, y, k)
    rule = it.rule(m)
    q = (xk / yk)[..., None]
    t = rule.nodes
    persp = yk[..., None] * q / (t * (q - 1.0) + 1.0)
    out = it.g0 * yk + (it.g1 - it.g0) * np.sum(rule.weights * persp, axis=-1)
    return float(out) if out.ndim == 0 else out


def eval_rmk_phi_matrix(it: MeanIteration, m: int, k: int, X, Y) -> np.ndarray:
    """Matrix version of eval_rmk_phi; needs an iteration with a matrix Phi."""
    _check_mk(m, k)
    if it.matrix_phi is None:
        raise NotImplementedError(f"no matrix form for the {it.name} iteration")
    X = require_pd(X, "X")
    Y = require_pd(Y, "Y")
    for _ in range(k):
        X, Y = it.matrix_phi(X, Y)
    rule = it.rule(m)
    Xi, Yi = invm(X), invm(Y)
    out = it.g0 * Y
    for t, w in zip(rule.nodes, rule.weights):
        out = out + (it.g1 - it.g0) * w * invm((1.0 - t) * Xi + t * Yi)
    return hermitian(out)


def _log_ratio(it, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == y):
        raise DomainError("contraction ratios are undefined for x = y")
    u, v = it.phi(x, y)
    return np.abs(np.log(u / v)), np.abs(np.log(x / y))


def contraction_ratio(it: MeanIteration, x, y):
    """|log(P_{h1}/P_{h2})| / |log(x/y)|."""
    num, den = _log_ratio(it, x, y)
    return num / den


def quadratic_ratio(it: MeanIteration, x, y):
    """|log(P_{h1}/P_{h2})| / |log(x/y)|^2."""
    num, den = _log_ratio(it, x, y)
    return num / den**2


def _nonneg(v: float) -> float:
    return v if v == v and v > 0.0 else 0.0


def _smallest_even(v: float) -> int:
    k = ceil(_nonneg(v))
    return k + (k % 2)


def k_lower_bound(it: MeanIteration, a: float, eps: float, quadratic: bool = False) -> float:
    """The real number k must exceed: max{2 log_c log a, sqrt(log_c C)} in the
    linear branch and max{2 log_c log a, 2 log2 log_c0 C} in the quadratic
    one, with C = 8 (g(1) - g(0)) (1 + a) / (3 eps).  Negative or undefined
    terms count as zero."""
    if a <= 1.0 or eps <= 0.0:
        raise ValueError("need a > 1 and eps > 0")
    if quadratic and it.c0 is None:
        raise ValueError(f"the {it.name} iteration has no quadratic contraction constant")
    C = 8.0 * (it.g1 - it.g0) * (1.0 + a) / (3.0 * eps)
    la = log(a)
    shrink = _nonneg(2.0 * log(la) / log(it.c)) if la > 1.0 else 0.0
    if C <= 1.0:
        return shrink
    if quadratic:
        lc0 = log(C) / log(it.c0)
        return max(shrink, _nonneg(2.0 * log2(lc0)) if lc0 > 0 else 0.0)
    return max(shrink, sqrt(log(C) / log(it.c)))


def choose_params_funceq(it: MeanIteration, a: float, eps: float, quadratic: Optional[bool] = None):
    """Explicit (m, k) with sup over [1/a, a] of |r_{m,k} - g| <= eps.

    k is the smallest even integer above k_lower_bound.  The linear branch
    takes m the smallest integer >= k max{1, log b / log 16}; the quadratic
    branch (default when c0 is set) takes m >= max{1, k log b / log(16/c0)}.
    m is at least 1, so a loose eps gives (1, 0).
    """
    if quadratic is None:
        quadratic = it.c0 is not None
    k = _smallest_even(k_lower_bound(it, a, eps, quadratic))
    if quadratic:
        m = ceil(max(1.0, k * log(it.b) / log(16.0 / it.c0)))
    else:
        m = ceil(k * max(1.0, log(it.b) / log(16.0)))
    return max(int(m), 1), int(k)


def description_size(it: MeanIteration, m: int, k: int) -> int:
    """2m + k (s1 + s2): total size of the non-scalar PSD blocks of funceq_cone."""
    return 2 * m + k * (it.block_size1 + it.block_size2)


def funceq_cone(it: MeanIteration, m: int, k: int) -> LinearMatrixSystem:
    """System in scalars (x, y, tau) approximating tau <= P_g(x, y).

    Layer i replaces (x, y) by affine expressions bounded by P_{h1} and
    P_{h2} of the previous layer.  The last pair feeds m harmonic 2 x 2
    blocks tau_j <= P_{f_tj^+}(x_k, y_k) and a scalar inequality
    tau <= g0 y_k + (g1 - g0) sum_j w_j tau_j.
    """
    _check_mk(m, k)
    sys = LinearMatrixSystem(f"funceq_cone({it.name}, m={m}, k={k})")
    x = sys.add_variable("x", 1, REAL, "input")
    y = sys.add_variable("y", 1, REAL, "input")
    tau = sys.add_variable("tau", 1, REAL, "input")
    u, v = x, y
    for i in range(1, k + 1):
        u, v = it.emit_h1(sys, u, v, f"s1_{i}"), it.emit_h2(sys, u, v, f"s2_{i}")
    rule = it.rule(m)
    total = v * it.g0 - tau
    for j, (t, w) in enumerate(zip(rule.nodes, rule.weights), start=1):
        t = float(t)
        tj = sys.add_variable(f"tau{j}", 1, REAL)
        sys.add_block(f"harmonic {j}",
                      bmat([[v * (1.0 / t) - tj, -tj], [-tj, u * (1.0 / (1.0 - t)) - tj]]))
        total = total + tj * ((it.g1 - it.g0) * float(w))
    sys.add_block("target bound", total)
    return sys


def funceq_feasible(it: MeanIteration, m: int, k: int, x: float, y: float, tau: float,
                    **solver_kwargs) -> bool:
    """Is (x, y, tau) feasible for funceq_cone(it, m, k)?"""
    from .sdp import feasibility

    sys = funceq_cone(it, m, k)
    return feasibility(sys, {"x": x, "y": y, "tau": tau}, **solver_kwargs).feasible


def funceq_boundary(it: MeanIteration, m: int, k: int, x: float, y: float, **solver_kwargs) -> float:
    """Largest tau with (x, y, tau) in funceq_cone(it, m, k)."""
    from .sdp import optimize

    sys = funceq_cone(it, m, k)
    return optimize(sys, {"tau": 1.0}, {"x": x, "y": y}, "max", **solver_kwargs).value
