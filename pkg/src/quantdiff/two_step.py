"""Closed-form index selection and the two-step confidence interval.

Under a locally linear cdf, minimizing the interval width subject to the
chi-square acceptance constraint has a closed-form solution: the optimal
counts sit at N q plus or minus a z multiple of a variance-allocation
radical that depends only on the sample sizes and the ratio of the two
local cdf slopes. The slopes are unknown, so the procedure runs twice:
step 1 assumes equal slopes, step 2 plugs in finite-difference slope
estimates read off the step-1 order statistics. The final interval uses
just four order statistics, two per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    ConfidenceInterval,
    Method,
    OrderedSample,
    QuantileSpec,
    outward_index_interval,
)
from .errors import DomainError, InsufficientSampleError
from .likelihood import normal_quantile


@dataclass(frozen=True)
class IndexQuad:
    """The four order-statistic indexes defining a two-step interval.

    ``clamped`` records that at least one fractional index fell outside
    [1, N] before clamping; the resulting interval is valid but may be
    degenerate at the sample edge.
    """

    i_minus: int
    i_plus: int
    j_minus: int
    j_plus: int
    clamped: bool = False

    def __post_init__(self) -> None:
        if not (1 <= self.i_minus <= self.i_plus):
            raise DomainError(f"bad i indexes ({self.i_minus}, {self.i_plus})")
        if not (1 <= self.j_minus <= self.j_plus):
            raise DomainError(f"bad j indexes ({self.j_minus}, {self.j_plus})")


@dataclass(frozen=True)
class SlopeEstimates:
    """Finite-difference cdf slopes near the target quantile.

    ``fallback`` is set when an estimate degenerated (tied order
    statistics give a zero denominator); m_c and m_t are NaN in that case
    and callers revert to the equal-slope indexes.
    """

    m_c: float
    m_t: float
    fallback: bool


def _index_halfwidth(z: float, n_c: int, n_t: int, q: float, denom: float) -> float:
    # Shared by both steps so that an equal-slope step 2 reproduces the
    # step-1 floats bit for bit.
    return z * math.sqrt(n_c * n_t * q * (1.0 - q) / denom)


def _build_quad(
    n_c: int, n_t: int, q: float, hw_i: float, hw_j: float
) -> IndexQuad:
    i_minus, i_plus, clamp_i = outward_index_interval(n_c * q, hw_i, n_c)
    j_minus, j_plus, clamp_j = outward_index_interval(n_t * q, hw_j, n_t)
    if i_minus == i_plus or j_minus == j_plus:
        raise InsufficientSampleError(
            f"index interval collapsed (n_c={n_c}, n_t={n_t}, q={q}): "
            "sample too small for the requested quantile and level"
        )
    return IndexQuad(i_minus, i_plus, j_minus, j_plus, clamped=clamp_i or clamp_j)


def step1_indexes(spec: QuantileSpec, n_c: int, n_t: int) -> IndexQuad:
    """Equal-slope optimal indexes, N q +/- z * s with the pooled radical.

    s = sqrt(n_c n_t q (1-q) / (n_c + n_t)); fractional endpoints round
    outward (floor below, ceil above) and clamp into [1, N].
    """
    if n_c < 1 or n_t < 1:
        raise DomainError("sample sizes must be >= 1")
    z = normal_quantile(1.0 - spec.alpha / 2.0)
    hw = _index_halfwidth(z, n_c, n_t, spec.q, n_c + n_t)
    return _build_quad(n_c, n_t, spec.q, hw, hw)


def estimate_slopes(
    control: OrderedSample, treatment: OrderedSample, quad: IndexQuad
) -> SlopeEstimates:
    """Finite-difference cdf slopes across the step-1 index span.

    m_hat = ((i_plus - i_minus) / n) / (y_(i_plus) - y_(i_minus)). Tied
    order statistics make a denominator zero; that is reported through
    ``fallback`` rather than an error, since ties are routine in rounded
    or discrete-valued data.
    """
    dy_c = control.order_stat(quad.i_plus) - control.order_stat(quad.i_minus)
    dy_t = treatment.order_stat(quad.j_plus) - treatment.order_stat(quad.j_minus)
    if dy_c <= 0.0 or dy_t <= 0.0:
        return SlopeEstimates(m_c=math.nan, m_t=math.nan, fallback=True)
    m_c = ((quad.i_plus - quad.i_minus) / control.n) / dy_c
    m_t = ((quad.j_plus - quad.j_minus) / treatment.n) / dy_t
    return SlopeEstimates(m_c=m_c, m_t=m_t, fallback=False)


def step2_indexes(
    spec: QuantileSpec, n_c: int, n_t: int, slopes: SlopeEstimates
) -> IndexQuad:
    """Slope-aware optimal indexes from the width-minimizing allocation.

    i = n_c q +/- z sqrt(n_c n_t q(1-q) / (n_t + n_c (m_c/m_t)^2))
    j = n_t q +/- z sqrt(n_c n_t q(1-q) / (n_c + n_t (m_t/m_c)^2))

    A large m_c/m_t means the control quantile is pinned down precisely,
    so the variance budget shifts toward the treatment indexes.
    """
    if n_c < 1 or n_t < 1:
        raise DomainError("sample sizes must be >= 1")
    if slopes.fallback:
        raise DomainError("step-2 indexes require non-degenerate slope estimates")
    if not (slopes.m_c > 0.0 and slopes.m_t > 0.0):
        raise DomainError(f"slopes must be positive, got ({slopes.m_c}, {slopes.m_t})")
    z = normal_quantile(1.0 - spec.alpha / 2.0)
    hw_i = _index_halfwidth(z, n_c, n_t, spec.q, n_t + n_c * (slopes.m_c / slopes.m_t) ** 2)
    hw_j = _index_halfwidth(z, n_c, n_t, spec.q, n_c + n_t * (slopes.m_t / slopes.m_c) ** 2)
    return _build_quad(n_c, n_t, spec.q, hw_i, hw_j)


def two_step_ci(
    control: OrderedSample, treatment: OrderedSample, spec: QuantileSpec
) -> ConfidenceInterval:
    """Fast difference-in-quantile interval from four order statistics.

    Runs step 1, estimates slopes across the step-1 span, then recomputes
    the indexes with the slope ratio. If slope estimation degenerates or
    the step-2 indexes collapse, the step-1 quad is used instead and the
    slope_fallback flag is set. The interval is

        (y_t(j_minus) - y_c(i_plus), y_t(j_plus) - y_c(i_minus)).
    """
    n_c, n_t = control.n, treatment.n
    quad1 = step1_indexes(spec, n_c, n_t)
    slopes = estimate_slopes(control, treatment, quad1)
    flags: set[str] = set()
    if slopes.fallback:
        quad = quad1
        flags.add("slope_fallback")
    else:
        try:
            quad = step2_indexes(spec, n_c, n_t, slopes)
        except InsufficientSampleError:
            quad = quad1
            flags.add("slope_fallback")
    if quad1.clamped or quad.clamped:
        flags.add("clamped_index")
    lower = treatment.order_stat(quad.j_minus) - control.order_stat(quad.i_plus)
    upper = treatment.order_stat(quad.j_plus) - control.order_stat(quad.i_minus)
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        alpha=spec.alpha,
        method=Method.LR_TWO_STEP,
        flags=frozenset(flags),
    )
