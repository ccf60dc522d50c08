"""Binomial quantile likelihood, the LR statistic, and reference quantiles.

Everything here is pure scalar math. Likelihood values are handled in
natural-log space throughout: binomial coefficients overflow doubles for
sample sizes in the low thousands, while log-space differences stay
well-conditioned even at n = 1e8.

The normal inverse CDF is a rational approximation (Acklam's coefficients)
polished with one Halley step, giving errors near machine precision with
no dependency beyond ``math``. Chi-square(1) quantiles and tail
probabilities derive from it through the identity chi2(1) = Z**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import QuantileSpec, max_likelihood_index
from .errors import ConsistencyError, DomainError, IndexOutOfRangeError

# Largest negative LR value attributed to rounding noise; anything more
# negative means a broken invariant, not floating-point slack.
_LR_SLACK = 1e-9


def log_binomial_pmf(i: int, q: float, n: int) -> float:
    """Natural log of the binomial pmf C(n, i) * q**i * (1-q)**(n-i).

    Parameters
    ----------
    i : int
        Number of successes, 0 <= i <= n.
    q : float
        Success probability, strictly inside (0, 1).
    n : int
        Number of trials, n >= 1.

    Returns
    -------
    float
        ln P(X = i) for X ~ Binomial(n, q), always finite for q in (0, 1).
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if i < 0 or i > n:
        raise IndexOutOfRangeError(f"count i={i} outside [0, {n}]")
    return (
        math.lgamma(n + 1)
        - math.lgamma(i + 1)
        - math.lgamma(n - i + 1)
        + i * math.log(q)
        + (n - i) * math.log1p(-q)
    )


@dataclass(frozen=True)
class LRStatistic:
    """Value of the likelihood-ratio statistic H at a grid point (i, j).

    ``exact`` distinguishes the exact binomial form from the asymptotic
    quadratic (de Moivre-Laplace) form.
    """

    value: float
    i_star: int
    j_star: int
    exact: bool

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ConsistencyError(f"LR statistic must be >= 0, got {self.value}")


def _clamp_lr(value: float) -> float:
    if value < -_LR_SLACK:
        raise ConsistencyError(
            f"LR statistic {value} below -{_LR_SLACK}; likelihood ordering violated"
        )
    if value <= 0.0:
        return 0.0  # also normalizes -0.0
    return value


def lr_statistic_exact(
    i: int, j: int, spec: QuantileSpec, n_c: int, n_t: int
) -> LRStatistic:
    """Exact LR statistic H(i, j | q, n_c, n_t).

    H is -2 times the log of the ratio between the joint likelihood at
    counts (i, j) and the unconstrained maximum, which sits at the counts
    floor(q*(n+1)) for each sample. Zero iff (i, j) is that maximizer.
    """
    q = spec.q
    k_c = max_likelihood_index(q, n_c)
    k_t = max_likelihood_index(q, n_t)
    value = -2.0 * (
        log_binomial_pmf(i, q, n_c)
        + log_binomial_pmf(j, q, n_t)
        - log_binomial_pmf(k_c, q, n_c)
        - log_binomial_pmf(k_t, q, n_t)
    )
    return LRStatistic(value=_clamp_lr(value), i_star=i, j_star=j, exact=True)


def lr_statistic_asymptotic(
    i: int, j: int, spec: QuantileSpec, n_c: int, n_t: int
) -> LRStatistic:
    """Large-sample quadratic form replacing the exact H.

    Applies the normal limit of the binomial to each sample:
    (i - n_c q)^2 / (n_c q (1-q)) + (j - n_t q)^2 / (n_t q (1-q)).
    """
    q = spec.q
    if n_c < 1 or n_t < 1:
        raise DomainError("sample sizes must be >= 1")
    if i < 0 or i > n_c:
        raise IndexOutOfRangeError(f"count i={i} outside [0, {n_c}]")
    if j < 0 or j > n_t:
        raise IndexOutOfRangeError(f"count j={j} outside [0, {n_t}]")
    value = (i - n_c * q) ** 2 / (n_c * q * (1.0 - q)) + (j - n_t * q) ** 2 / (
        n_t * q * (1.0 - q)
    )
    return LRStatistic(value=value, i_star=i, j_star=j, exact=False)


# Acklam's rational approximation to the standard normal inverse CDF.
_PPF_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_PPF_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_PPF_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_PPF_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_PPF_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _ppf_tail(u: float) -> float:
    # u = sqrt(-2 ln p_tail); returns the (negative) lower-tail branch.
    a, b, c, d, e, f = _PPF_C
    num = ((((a * u + b) * u + c) * u + d) * u + e) * u + f
    g, h, k, m = _PPF_D
    den = (((g * u + h) * u + k) * u + m) * u + 1.0
    return num / den


def normal_quantile(p: float) -> float:
    """Standard normal inverse CDF, accurate to roughly 1e-15.

    Rational approximation followed by one Halley refinement of
    Phi(x) - p = 0; the refinement is skipped in the far tails where
    exp(x*x/2) would overflow (|x| > 37, i.e. p below ~1e-300, where the
    raw approximation is already adequate).
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if p < _PPF_P_LOW:
        x = _ppf_tail(math.sqrt(-2.0 * math.log(p)))
    elif p > 1.0 - _PPF_P_LOW:
        x = -_ppf_tail(math.sqrt(-2.0 * math.log1p(-p)))
    else:
        r = p - 0.5
        s = r * r
        a, b, c, d, e, f = _PPF_A
        num = (((((a * s + b) * s + c) * s + d) * s + e) * s + f) * r
        g, h, k, m, t = _PPF_B
        den = ((((g * s + h) * s + k) * s + m) * s + t) * s + 1.0
        x = num / den
    if abs(x) < 37.0:
        err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
        u = err * _SQRT_2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def chi2_quantile_1df(alpha: float) -> float:
    """Upper-alpha critical value of chi-square with one degree of freedom.

    P(chi2(1) > c) = alpha at the returned c; computed as the square of
    the standard normal upper alpha/2 quantile.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    z = normal_quantile(1.0 - alpha / 2.0)
    return z * z


def chi2_sf_1df(x: float) -> float:
    """Survival function P(chi2(1) > x) = 2 (1 - Phi(sqrt(x))) = erfc(sqrt(x/2))."""
    if x < 0.0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    return math.erfc(math.sqrt(0.5 * x))
