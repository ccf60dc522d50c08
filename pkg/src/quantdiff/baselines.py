"""Baseline difference-in-quantile intervals built from one-sample CIs.

The one-sample interval is the distribution-free order-statistic
construction with normal-approximation indexes, N q +/- z sqrt(N q (1-q)).
Price-Bonnet combines two such intervals through a Wald variance
back-solve, Var(tau_hat) ~= ((u - l) / (2 z))^2, which keeps the whole
pipeline density-free. Donner-Zou recombines the one-sample bounds
asymmetrically so that skewed sampling distributions keep their skew in
the final interval.
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
    quantile_point_estimate,
)
from .errors import ConsistencyError, InsufficientSampleError
from .likelihood import normal_quantile


@dataclass(frozen=True)
class OneSampleBounds:
    """Order-statistic quantile CI for a single sample."""

    lower: float
    upper: float
    lower_index: int
    upper_index: int
    clamped: bool = False

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ConsistencyError(
                f"one-sample bounds out of order: ({self.lower}, {self.upper})"
            )


def one_sample_ci(sample: OrderedSample, spec: QuantileSpec) -> OneSampleBounds:
    """Distribution-free CI for the q-quantile of one sample.

    Fractional indexes N q +/- z sqrt(N q (1-q)) are rounded outward and
    clamped into [1, N]; the bounds are the order statistics at the
    resulting indexes.
    """
    n = sample.n
    z = normal_quantile(1.0 - spec.alpha / 2.0)
    halfwidth = z * math.sqrt(n * spec.q * (1.0 - spec.q))
    lo_idx, hi_idx, clamped = outward_index_interval(n * spec.q, halfwidth, n)
    if lo_idx == hi_idx:
        raise InsufficientSampleError(
            f"one-sample index interval collapsed (n={n}, q={spec.q}, alpha={spec.alpha})"
        )
    return OneSampleBounds(
        lower=sample.order_stat(lo_idx),
        upper=sample.order_stat(hi_idx),
        lower_index=lo_idx,
        upper_index=hi_idx,
        clamped=clamped,
    )


def _flags(bounds_c: OneSampleBounds, bounds_t: OneSampleBounds) -> frozenset[str]:
    if bounds_c.clamped or bounds_t.clamped:
        return frozenset({"clamped_index"})
    return frozenset()


def price_bonnet_ci(
    control: OrderedSample, treatment: OrderedSample, spec: QuantileSpec
) -> ConfidenceInterval:
    """Symmetric Wald interval for the quantile difference.

    C(alpha) = (tau_t - tau_c) +/- z sqrt(Var_t + Var_c) with each
    variance backed out of the one-sample CI halfwidth at the same alpha.
    """
    z = normal_quantile(1.0 - spec.alpha / 2.0)
    bounds_c = one_sample_ci(control, spec)
    bounds_t = one_sample_ci(treatment, spec)
    var_c = ((bounds_c.upper - bounds_c.lower) / (2.0 * z)) ** 2
    var_t = ((bounds_t.upper - bounds_t.lower) / (2.0 * z)) ** 2
    diff = quantile_point_estimate(treatment, spec.q) - quantile_point_estimate(
        control, spec.q
    )
    halfwidth = z * math.sqrt(var_t + var_c)
    return ConfidenceInterval(
        lower=diff - halfwidth,
        upper=diff + halfwidth,
        alpha=spec.alpha,
        method=Method.PRICE_BONNET,
        flags=_flags(bounds_c, bounds_t),
    )


def donner_zou_ci(
    control: OrderedSample, treatment: OrderedSample, spec: QuantileSpec
) -> ConfidenceInterval:
    """Asymmetric interval combining one-sample bounds per tail.

    Each endpoint pairs the relevant tail distances of the two one-sample
    intervals:

        upper = diff + sqrt((u_t - tau_t)^2 + (tau_c - l_c)^2)
        lower = diff - sqrt((tau_t - l_t)^2 + (u_c - tau_c)^2)

    so asymmetry of the one-sample intervals survives into the combined
    interval instead of being averaged away.
    """
    bounds_c = one_sample_ci(control, spec)
    bounds_t = one_sample_ci(treatment, spec)
    tau_c = quantile_point_estimate(control, spec.q)
    tau_t = quantile_point_estimate(treatment, spec.q)
    diff = tau_t - tau_c
    upper = diff + math.sqrt(
        (bounds_t.upper - tau_t) ** 2 + (tau_c - bounds_c.lower) ** 2
    )
    lower = diff - math.sqrt(
        (tau_t - bounds_t.lower) ** 2 + (bounds_c.upper - tau_c) ** 2
    )
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        alpha=spec.alpha,
        method=Method.DONNER_ZOU,
        flags=_flags(bounds_c, bounds_t),
    )
