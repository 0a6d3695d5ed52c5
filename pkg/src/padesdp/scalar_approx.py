"""Rational approximants of operator monotone functions built from quadrature.

Two integral representations are used.  The centered one,

    g(x) = g(1) + g'(1) * integral f_t(x) dnu(t),  f_t(x) = (x - 1)/(t (x - 1) + 1),

and the positive one,

    g(x) = g(0) + (g(1) - g(0)) * integral f_t^+(x) dmu(t),
    f_t^+(x) = ((1 - t)/x + t)^{-1}.

Replacing the measure by an m-point Gauss rule gives r_m (or r_m^+).  For the
logarithm (nu = Lebesgue on [0, 1]) r_m is the (m, m) Pade approximant at
x = 1, and r_{m,k}(x) = 2^k r_m(x^{1/2^k}) improves it by square-root
scaling.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log, log2, sqrt

import mpmath
import numpy as np

from .quadrature import QuadratureRule, gauss_arcsine, gauss_legendre

CENTERED = "centered"
POSITIVE = "positive"


def f_t(t, x):
    """f_t(x) = (x - 1) / (t (x - 1) + 1)."""
    x = np.asarray(x, dtype=float)
    return (x - 1.0) / (t * (x - 1.0) + 1.0)


def f_t_plus(t, x):
    """f_t^+(x) = ((1 - t)/x + t)^{-1} = x / (t (x - 1) + 1); equals 1 at x = 1."""
    x = np.asarray(x, dtype=float)
    return x / (t * (x - 1.0) + 1.0)


def f_tilde(t, x):
    """f_{(1 - t)/2}(x) = 2 / ((x + 1)/(x - 1) - t), the form used on t in [-1, 1]."""
    return f_t(0.5 * (1.0 - t), x)


def repeated_sqrt(x, k: int):
    """x^{1/2^k} by k successive square roots (exact at x = 1)."""
    y = np.asarray(x, dtype=float)
    for _ in range(k):
        y = np.sqrt(y)
    return y


def repeated_sqrt_deviation(x, k: int):
    """(x^{1/2^k}, x^{1/2^k} - 1), the second computed without cancellation
    through sqrt(y) - 1 = (y - 1) / (sqrt(y) + 1)."""
    y = np.asarray(x, dtype=float)
    d = y - 1.0
    for _ in range(k):
        r = np.sqrt(y)
        d = d / (r + 1.0)
        y = r
    return y, d


@dataclass(frozen=True)
class RationalApproximant:
    """r_m, r_m^+ or r_{m,k} defined by a quadrature rule and anchor values.

    For the centered variant ``anchor`` is (g(1), g'(1)); for the positive
    variant it is (g(0), g(1)).  ``k`` is the number of square-root scalings
    and is only meaningful for the logarithm.
    """

    variant: str
    rule: QuadratureRule
    anchor: tuple
    k: int = 0

    def __post_init__(self):
        if self.variant not in (CENTERED, POSITIVE):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 0:
            raise ValueError("k must be nonnegative")

    @property
    def m(self) -> int:
        return self.rule.order

    @property
    def is_log(self) -> bool:
        return (self.variant == CENTERED and tuple(self.anchor) == (0.0, 1.0)
                and self.rule.measure_tag == "legendre")

    def with_k(self, k: int) -> "RationalApproximant":
        return RationalApproximant(self.variant, self.rule, self.anchor, k)


def log_approximant(m: int, k: int = 0) -> RationalApproximant:
    """r_{m,k} for the natural logarithm (Gauss-Legendre nodes)."""
    return RationalApproximant(CENTERED, gauss_legendre(m), (0.0, 1.0), k)


def sqrt_approximant(m: int) -> RationalApproximant:
    """r_m^+ for the square root (arcsine rule, g(0) = 0, g(1) = 1)."""
    return RationalApproximant(POSITIVE, gauss_arcsine(m), (0.0, 1.0))


def _centered_sum(approx, d):
    """sum_j w_j f_{t_j}(1 + d), written in terms of the deviation d = x - 1."""
    ds = np.asarray(d, dtype=float)[..., None]
    t = approx.rule.nodes
    return np.sum(approx.rule.weights * (ds / (t * ds + 1.0)), axis=-1)


def eval_rm(approx: RationalApproximant, x):
    """r_m(x) (or r_m^+(x)) ignoring any scaling k."""
    x = np.asarray(x, dtype=float)
    t = approx.rule.nodes
    w = approx.rule.weights
    xs = x[..., None]
    if approx.variant == CENTERED:
        g1, g1p = approx.anchor
        return g1 + g1p * _centered_sum(approx, x - 1.0)
    g0, g1 = approx.anchor
    s = np.sum(w * f_t_plus(t, xs), axis=-1)
    return g0 + (g1 - g0) * s


def eval_rmk(approx: RationalApproximant, x):
    """r_{m,k}(x) = 2^k r_m(x^{1/2^k}) for the logarithm."""
    if approx.k > 0 and not approx.is_log:
        raise ValueError("square-root scaling applies to the logarithm approximant only")
    if approx.variant == CENTERED:
        _, d = repeated_sqrt_deviation(x, approx.k)
        g1, g1p = approx.anchor
        return 2.0**approx.k * (g1 + g1p * _centered_sum(approx, d))
    return 2.0**approx.k * eval_rm(approx, repeated_sqrt(x, approx.k))


def _rho(x):
    s = np.sqrt(np.asarray(x, dtype=float))
    return np.abs((s - 1.0) / (s + 1.0))


def error_bound_log(x, m: int, k: int):
    """2^k |sqrt(kappa) - 1/sqrt(kappa)|^2 rho^{2m-1}, kappa = x^{1/2^k},
    rho = |sqrt(kappa) - 1| / (sqrt(kappa) + 1)."""
    kappa = repeated_sqrt(x, k)
    s = np.sqrt(kappa)
    return 2.0**k * (s - 1.0 / s) ** 2 * _rho(kappa) ** (2 * m - 1)


def error_bound_monotone(x, m: int, symmetric: bool = False, g1prime: float = 1.0):
    """Bound on |r_m(x) - g(x)| for the centered representation.

    General measure: 4 g'(1) |sqrt x - 1/sqrt x| rho^{2m} / (1 - rho).
    Measure symmetric under t -> 1 - t: g'(1) |sqrt x - 1/sqrt x|^2 rho^{2m-1}.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(x)
    r = _rho(x)
    if symmetric:
        return g1prime * (s - 1.0 / s) ** 2 * r ** (2 * m - 1)
    return 4.0 * g1prime * np.abs(s - 1.0 / s) * r ** (2 * m) / (1.0 - r)


def error_bound_positive(x, m: int, g0: float = 0.0, g1: float = 1.0):
    """Bound on |r_m^+(x) - g(x)|: 4 (g(1) - g(0)) sqrt(x) rho^{2m} / (1 - rho)."""
    x = np.asarray(x, dtype=float)
    r = _rho(x)
    return 4.0 * (g1 - g0) * np.sqrt(x) * r ** (2 * m) / (1.0 - r)


def choose_params_log(a: float, eps: float):
    """(m, k) with sup over [1/a, a] of |r_{m,k}(x) - log x| <= eps.

    k1 = ceil(log2(ln a)) + 1 brings the scaled argument into [e^{-1/2}, e^{1/2}];
    k2 is the smallest even integer >= sqrt(log2(32 ln a / eps)), m = k2 / 2.
    """
    if a <= 1.0 or eps <= 0.0:
        raise ValueError("need a > 1 and eps > 0")
    k1 = ceil(log2(log(a))) + 1
    arg = log2(32.0 * log(a) / eps)
    k2 = ceil(sqrt(max(arg, 0.0)))
    if k2 % 2:
        k2 += 1
    k2 = max(k2, 2)
    return k2 // 2, max(k1, 0) + k2


def log_taylor_series(n: int) -> list:
    """Coefficients of log(1 + u): [0, 1, -1/2, 1/3, ...], n terms."""
    return [Fraction(0)] + [Fraction((-1) ** (j + 1), j) for j in range(1, n)]


def rm_taylor_series(approx: RationalApproximant, n: int, dps: int = 50) -> list:
    """Taylor coefficients of r_m(1 + u) in u (centered variant), 50-digit arithmetic.

    r_m(1 + u) = g(1) + g'(1) sum_j w_j u / (1 + t_j u), so the coefficient of
    u^{p+1} is g'(1) (-1)^p sum_j w_j t_j^p.
    """
    if approx.variant != CENTERED:
        raise ValueError("Taylor matching is defined for the centered variant")
    g1, g1p = approx.anchor
    with mpmath.workdps(dps):
        t = [mpmath.mpf(float(v)) for v in approx.rule.nodes]
        w = [mpmath.mpf(float(v)) for v in approx.rule.weights]
        out = [mpmath.mpf(g1)]
        for p in range(n - 1):
            out.append(mpmath.mpf(g1p) * (-1) ** p * mpmath.fsum(wj * tj**p for wj, tj in zip(w, t)))
    return out


def taylor_match_order(approx: RationalApproximant, reference, tol: float = 1e-10) -> int:
    """Number of leading Taylor coefficients at x = 1 shared by r_m and the
    reference series (counting the constant term)."""
    n = len(reference)
    ours = rm_taylor_series(approx, n)
    count = 0
    for a, b in zip(ours, reference):
        b = mpmath.mpf(b.numerator) / b.denominator if isinstance(b, Fraction) else mpmath.mpf(b)
        if abs(a - b) > tol:
            break
        count += 1
    return count


def cheb_coeff_ft(x, j: int):
    """Chebyshev coefficient a_j(x) of t -> f_tilde(t, x) on [-1, 1]:

    f_tilde(t, x) = a_0(x) + sum_{j>=1} a_j(x) T_j(t),
    a_0 = sqrt x - 1/sqrt x,  a_j = 2 (sqrt x - 1/sqrt x) ((sqrt x - 1)/(sqrt x + 1))^j.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(x)
    base = s - 1.0 / s
    if j == 0:
        return base
    return 2.0 * base * ((s - 1.0) / (s + 1.0)) ** j


def cheb_partial_sum(x, t, terms: int):
    """Sum of the first ``terms`` Chebyshev terms of f_tilde(., x) at t."""
    coeffs = [cheb_coeff_ft(x, j) for j in range(terms)]
    return np.polynomial.chebyshev.chebval(t, coeffs)
