"""Gaussian quadrature rules on [0, 1].

Rules come from the eigen-decomposition of a Jacobi (three-term recurrence)
matrix.  The recurrence is known in closed form for the Lebesgue measure; for
an arbitrary density it is produced by the discretized Stieltjes procedure on
a fine auxiliary rule.

The fine rule lives in the variable theta, with

    t = 1 / (1 + exp(-pi * tan(theta)))

so that logit(t) = pi * tan(theta).  Under this map the logarithmic-mean
measure becomes the uniform density 1/pi in theta, and densities that are
bounded or have inverse-square-root endpoint singularities turn into smooth,
decaying integrands.  Theta is truncated where t can no longer be
distinguished from 0 or 1 in double precision; the truncated tail mass is
placed as an atom at the cut, using the integrand value at the cut times the
remaining theta length.

The logarithmic-mean and AGM measures keep a mass of order 1/|log t| near the
endpoints, too much to capture reliably on any double-precision grid.  Their
rules are built instead from exact moments: if
g(x) = integral of x / ((1 - t) + t x) dmu(t), then
g(1 + v) / (1 + v) = sum_p (-v)^p integral t^p dmu, so the moments are Taylor
coefficients of a known function.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np

from .errors import DomainError, NumericalError
from .hermitian import eig

# |logit(t)| cut-offs.  expit(36) is still distinguishable from 1; when the
# density is symmetric it is only evaluated on t <= 1/2, which is accurate
# down to t = exp(-700).
LOGIT_CUT = 36.0
LOGIT_CUT_SYMMETRIC = 700.0
PANEL_ORDER = 16


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in (0, 1) with positive weights.

    ``measure_tag`` names the measure the rule integrates against.
    """

    nodes: np.ndarray
    weights: np.ndarray
    measure_tag: str = "custom"
    mass: float = field(default=1.0)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be nonempty 1-d arrays of equal length")
        if np.any(nodes <= 0.0) or np.any(nodes >= 1.0):
            raise NumericalError("quadrature nodes must lie strictly inside (0, 1)")
        if np.any(np.diff(nodes) <= 0.0):
            raise NumericalError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0.0):
            raise NumericalError("quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def order(self) -> int:
        return self.nodes.size

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def moments(self, degree: int) -> np.ndarray:
        """sum_j w_j t_j^p for p = 0..degree."""
        return np.array([np.dot(self.weights, self.nodes**p) for p in range(degree + 1)])


def rule_from_recurrence(alpha, beta, mass: float = 1.0, tag: str = "custom") -> QuadratureRule:
    """Golub-Welsch: nodes and weights from recurrence coefficients.

    ``alpha`` has length m, ``beta`` has length m - 1 and holds the squared
    off-diagonal entries of the Jacobi matrix.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    m = alpha.size
    if np.any(beta <= 0.0):
        raise NumericalError("recurrence coefficients beta must be positive")
    J = np.diag(alpha)
    if m > 1:
        off = np.sqrt(beta)
        J += np.diag(off, 1) + np.diag(off, -1)
    w, V = eig(J)
    weights = mass * np.abs(V[0, :]) ** 2
    return QuadratureRule(w, weights, tag, mass)


def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule for dt on [0, 1]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    j = np.arange(1, m, dtype=float)
    beta = 0.25 * j**2 / (4.0 * j**2 - 1.0)
    rule = rule_from_recurrence(np.full(m, 0.5), beta, 1.0, "legendre")
    return _symmetrize(rule)


def gauss_arcsine(m: int) -> QuadratureRule:
    """Chebyshev-Gauss rule for dt / (pi sqrt(t(1-t))) on [0, 1], in closed form."""
    if m < 1:
        raise ValueError("m must be >= 1")
    j = np.arange(m, 0, -1)
    nodes = 0.5 * (1.0 + np.cos((2 * j - 1) * np.pi / (2 * m)))
    return QuadratureRule(nodes, np.full(m, 1.0 / m), "arcsine", 1.0)


def _symmetrize(rule: QuadratureRule) -> QuadratureRule:
    """Average a rule with its mirror image t -> 1 - t (for symmetric measures)."""
    nodes = 0.5 * (rule.nodes + (1.0 - rule.nodes[::-1]))
    weights = 0.5 * (rule.weights + rule.weights[::-1])
    return QuadratureRule(nodes, weights, rule.measure_tag, rule.mass)


def fine_rule(density: Callable, N: int, symmetric: bool = False):
    """Fine discretization of density(t) dt on (0, 1).

    Returns (points, weights) with about N points.  Composite Gauss-Legendre
    panels on the truncated theta interval, plus one atom at each cut.  For a
    symmetric density it is evaluated at min(t, 1 - t), which keeps full
    relative accuracy near t = 1.
    """
    panels = max(1, (N - 2) // PANEL_ORDER)
    theta_cut = np.arctan((LOGIT_CUT_SYMMETRIC if symmetric else LOGIT_CUT) / np.pi)
    x, w = np.polynomial.legendre.leggauss(PANEL_ORDER)
    edges = np.linspace(-theta_cut, theta_cut, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    theta = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wtheta = (half[:, None] * w[None, :]).ravel()

    def integrand(th):
        u = np.pi * np.tan(th)
        t = _expit(u)
        t1 = _expit(-u)  # 1 - t without cancellation
        rho = np.asarray(density(np.minimum(t, t1) if symmetric else t), dtype=float)
        return t, rho * t * t1 * np.pi / np.cos(th) ** 2, rho

    t, g, rho = integrand(theta)
    if np.any(~np.isfinite(rho)) or np.any(rho <= 0.0):
        bad = t[np.argmax(~np.isfinite(rho) | (rho <= 0.0))]
        raise DomainError(f"density must be positive and finite on (0, 1); failed at t = {bad:.6e}")
    tail = np.pi / 2 - theta_cut
    ends = np.array([-theta_cut, theta_cut])
    t_end, g_end, _ = integrand(ends)
    points = np.concatenate([[t_end[0]], t, [t_end[1]]])
    weights = np.concatenate([[g_end[0] * tail], g * wtheta, [g_end[1] * tail]])
    return points, weights


def _expit(u):
    e = np.exp(-np.abs(u))
    return np.where(u >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def stieltjes(points, weights, m: int):
    """Discretized Stieltjes procedure (Lanczos form) for a discrete measure.

    Returns (alpha, beta, mass) of the first m orthonormal polynomials.
    """
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mass = float(np.sum(weights))
    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    p_prev = np.zeros_like(points)
    p = np.full_like(points, 1.0 / np.sqrt(mass))
    for k in range(m):
        alpha[k] = np.dot(weights, points * p * p)
        if k == m - 1:
            break
        q = (points - alpha[k]) * p - (np.sqrt(beta[k - 1]) * p_prev if k > 0 else 0.0)
        b = float(np.dot(weights, q * q))
        if not b > 0.0:
            raise NumericalError(f"Stieltjes recurrence broke down at step {k + 1} (beta = {b:.3e})")
        beta[k] = b
        p_prev, p = p, q / np.sqrt(b)
    return alpha, beta, mass


def gauss_from_density(density: Callable, m: int, N: int | None = None,
                       tag: str = "density", symmetric: bool = False) -> QuadratureRule:
    """m-point Gauss rule for density(t) dt on (0, 1).

    ``density`` must accept numpy arrays.  ``N`` is the size of the fine
    rule (default 256 m, at least 64 m).  With ``symmetric`` set the result
    is averaged with its mirror image, which removes rounding asymmetry for
    measures invariant under t -> 1 - t.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if N is None:
        N = 256 * m
    if N < 64 * m:
        raise ValueError(f"discretization N = {N} is below 64 m = {64 * m}")
    pts, wts = fine_rule(density, N, symmetric)
    alpha, beta, mass = stieltjes(pts, wts, m)
    rule = rule_from_recurrence(alpha, beta, mass, tag)
    return _symmetrize(rule) if symmetric else rule


def logmean_density(t):
    """Density of the measure representing (x - 1)/log(x):
    1 / (t (1 - t) (pi^2 + log((1 - t)/t)^2))."""
    t = np.asarray(t, dtype=float)
    L = np.log1p(-t) - np.log(t)
    return 1.0 / (t * (1.0 - t) * (np.pi**2 + L**2))


def arcsine_density(t):
    t = np.asarray(t, dtype=float)
    return 1.0 / (np.pi * np.sqrt(t * (1.0 - t)))


def _agm_complex(a, b, iters: int = 60):
    """AGM with the right choice of square root at every step (arrays)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for _ in range(iters):
        a_next = 0.5 * (a + b)
        r = np.sqrt(a * b)
        flip = np.abs(a_next - r) > np.abs(a_next + r)
        r = np.where(flip, -r, r)
        if np.all(np.abs(a - b) <= 1e-16 * np.abs(a)):
            break
        a, b = a_next, r
    return 0.5 * (a + b)


def agm_boundary_value(s):
    """Boundary value of z -> AGM(z, 1) at z = -s + i0 (s > 0).

    Uses AGM(z, 1) = AGM((1 + z)/2, sqrt(z)) followed by the elliptic-integral
    form AGM(a, b) = (a + b) AGM(1, sqrt(1 - k^2)) / 2 with k = (a - b)/(a + b);
    on the cut k lies on the unit circle, where the principal branch is the
    analytic continuation from the positive axis.
    """
    s = np.asarray(s, dtype=float)
    a = 0.5 * (1.0 - s)
    b = 1j * np.sqrt(s)
    k = (a - b) / (a + b)
    return 0.5 * (a + b) * _agm_complex(1.0, np.sqrt(1.0 - k * k))


def agm_density(t):
    """Density of the measure representing x -> AGM(x, 1) through
    AGM(x, 1) = integral of x / ((1 - t) + t x) dmu(t); obtained from the
    boundary values of AGM on the negative axis."""
    t = np.asarray(t, dtype=float)
    s = (1.0 - t) / t
    return np.imag(agm_boundary_value(s)) / (np.pi * (1.0 - t))


def logmean_moments(n: int) -> list:
    """Exact moments p = 0..n-1 of the logarithmic-mean measure.

    g(x) = (x - 1)/log x, so g(1 + v)/(1 + v) = 1 / ((1 + v) L(v)) with
    L(v) = log(1 + v)/v = sum_k (-v)^k / (k + 1).
    """
    L = [Fraction((-1) ** k, k + 1) for k in range(n)]
    inv = [Fraction(0)] * n  # series of 1/L
    inv[0] = Fraction(1)
    for p in range(1, n):
        inv[p] = -sum(L[j] * inv[p - j] for j in range(1, p + 1))
    # divide by (1 + v): running alternating sum
    out, acc = [], Fraction(0)
    for p in range(n):
        acc = inv[p] - acc
        out.append(acc * (-1) ** p)
    return out


def _series_mul(a, b, n):
    return [mpmath.fsum(a[j] * b[p - j] for j in range(p + 1)) for p in range(n)]


def _series_sqrt(a, n):
    r = [mpmath.sqrt(a[0])] + [mpmath.mpf(0)] * (n - 1)
    for p in range(1, n):
        r[p] = (a[p] - mpmath.fsum(r[j] * r[p - j] for j in range(1, p))) / (2 * r[0])
    return r


def agm_moments(n: int, dps: int = 60) -> list:
    """Moments p = 0..n-1 of the AGM measure, from the power series of
    AGM(1 + v, 1) computed by running the AGM iteration on truncated series."""
    with mpmath.workdps(dps):
        a = [mpmath.mpf(1), mpmath.mpf(1)] + [mpmath.mpf(0)] * max(n - 2, 0)
        a = a[:n]
        b = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (n - 1)
        tol = mpmath.mpf(10) ** (-dps + 5)
        for _ in range(200):
            a_next = [(x + y) / 2 for x, y in zip(a, b)]
            b = _series_sqrt(_series_mul(a, b, n), n)
            a = a_next
            if max(abs(x - y) for x, y in zip(a, b)) < tol:
                break
        out, acc = [], mpmath.mpf(0)
        for p in range(n):
            acc = a[p] - acc
            out.append(acc * (-1) ** p)
        return out


def rule_from_moments(moments, tag: str = "moments", dps: int = 60) -> QuadratureRule:
    """Gauss rule from moments c_0..c_{2m-1} (c_{2m} also used if given).

    Cholesky factorization of the Hankel moment matrix in extended precision
    yields the recurrence coefficients; the Hankel matrix is badly
    conditioned, which the working precision absorbs.
    """
    n = len(moments)
    m = (n + 1) // 2 if n % 2 else n // 2
    with mpmath.workdps(dps):
        c = [mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
             for x in moments]
        size = m + 1
        c = c + [mpmath.mpf(0)] * max(0, 2 * size - 1 - n)  # entries only used past the last row
        H = mpmath.matrix(size, size)
        for i in range(size):
            for j in range(size):
                H[i, j] = c[i + j]
        # upper Cholesky factor R with H = R^T R; the last pivot is unused
        R = mpmath.matrix(size, size)
        for i in range(m):
            d = H[i, i] - mpmath.fsum(R[k, i] ** 2 for k in range(i))
            if d <= 0:
                raise NumericalError(f"moment matrix is not positive definite at order {i}")
            R[i, i] = mpmath.sqrt(d)
            for j in range(i + 1, size):
                R[i, j] = (H[i, j] - mpmath.fsum(R[k, i] * R[k, j] for k in range(i))) / R[i, i]
        alpha, beta = [], []
        for k in range(m):
            a = R[k, k + 1] / R[k, k]
            if k > 0:
                a -= R[k - 1, k] / R[k - 1, k - 1]
            alpha.append(float(a))
            if k < m - 1:
                beta.append(float((R[k + 1, k + 1] / R[k, k]) ** 2))
        mass = float(c[0])
    return rule_from_recurrence(alpha, beta, mass, tag)


@lru_cache(maxsize=None)
def gauss_logmean(m: int) -> QuadratureRule:
    """Gauss rule for the logarithmic-mean probability measure
    dt / (t (1 - t) (pi^2 + log((1 - t)/t)^2))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    moments = logmean_moments(2 * m)
    return _symmetrize(rule_from_moments(moments, "logmean", dps=40 + 3 * m))


@lru_cache(maxsize=None)
def gauss_agm(m: int) -> QuadratureRule:
    """Gauss rule for the probability measure representing x -> AGM(x, 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    dps = 40 + 3 * m
    moments = agm_moments(2 * m, dps)
    return _symmetrize(rule_from_moments(moments, "agm", dps=dps))
