"""Constrained maximization, the LR hypothesis test, and the region CI.

The hypothesis tau_{q,t} = tau_{q,c} + d couples the two samples through a
single scalar tau. Because both count functions i(tau) = #{y_c < tau} and
j(tau) = #{y_t < tau + d} are step functions, the constrained likelihood
maximum is found by a line search over the finitely many intervals between
breakpoints, restricted to the closed span between the two unconstrained
optima.

The exact statistic H(i, j) separates into per-sample deficits,
H = g_c(i) + g_t(j), each unimodal with minimum 0 at floor(q*(n+1)). The
conservative confidence interval scans only the marginal index windows
where the deficits stay below the chi-square threshold; everything outside
is provably rejected, so the windowed scan is exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .core import ConfidenceInterval, Method, OrderedSample, QuantileSpec, max_likelihood_index
from .errors import ConsistencyError, DegenerateRegionError, ValidationError
from .likelihood import (
    chi2_quantile_1df,
    chi2_sf_1df,
    log_binomial_pmf,
    lr_statistic_exact,
)


@dataclass(frozen=True)
class LRTestResult:
    """Outcome of the LR test of tau_{q,t} = tau_{q,c} + d."""

    d: float
    statistic: float
    p_value: float
    i_star: int
    j_star: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ConsistencyError(f"p-value {self.p_value} outside [0, 1]")
        if self.statistic == 0.0 and abs(self.p_value - 1.0) > 1e-9:
            raise ConsistencyError("zero statistic must give p-value 1")

    def rejects_at(self, alpha: float) -> bool:
        return self.statistic >= chi2_quantile_1df(alpha)


@dataclass(frozen=True)
class AcceptanceGrid:
    """H values over the scanned index window, for external plotting.

    Rows are (i, j, h, accepted) tuples in row-major (i, then j) order;
    accepted means h < chi2_alpha(1) strictly.
    """

    rows: list[tuple[int, int, float, bool]]
    alpha: float
    exact: bool


def constrained_max_indexes(
    control: OrderedSample, treatment: OrderedSample, q: float, d: float
) -> tuple[int, int]:
    """Counts (i*, j*) maximizing h(i|q,N_c) * h(j|q,N_t) under the shift d.

    i and j are linked through tau: i counts control values below tau and
    j counts treatment values below tau + d. Ties in likelihood resolve to
    the candidate with the smallest i (then smallest j), which the
    ascending-tau sweep yields for free.
    """
    if not (0.0 < q < 1.0):
        raise ValidationError(f"q must lie in (0, 1), got {q!r}")
    if not math.isfinite(d):
        raise ValidationError(f"shift d must be finite, got {d!r}")
    n_c, n_t = control.n, treatment.n
    k_c = max_likelihood_index(q, n_c)
    k_t = max_likelihood_index(q, n_t)

    y_c = control.values
    y_t_shifted = treatment.values - d

    # tau-intervals on which each sample attains its unconstrained optimum.
    lo_c = y_c[k_c - 1] if k_c >= 1 else -math.inf
    hi_c = y_c[k_c] if k_c <= n_c - 1 else math.inf
    lo_t = y_t_shifted[k_t - 1] if k_t >= 1 else -math.inf
    hi_t = y_t_shifted[k_t] if k_t <= n_t - 1 else math.inf

    if max(lo_c, lo_t) < min(hi_c, hi_t):
        # The optima overlap: the constraint binds nowhere and H = 0.
        return k_c, k_t

    span_lo = min(lo_c, lo_t)
    span_hi = max(hi_c, hi_t)
    points = np.unique(np.concatenate([y_c, y_t_shifted]))
    # Inclusive index range of breakpoints inside the span. Finite span
    # edges are themselves breakpoints, so the range is never empty.
    first = int(np.searchsorted(points, span_lo, side="left"))
    last = int(np.searchsorted(points, span_hi, side="right")) - 1

    # One candidate per open interval inside the span, plus the interval
    # just outside each span edge. The outside intervals are dominated
    # whenever the optimum regions are nonempty, but with heavily tied
    # values a region can be an empty interval and the maximizer can sit
    # immediately beyond the edge.
    candidates: list[float] = []
    if first == 0:
        candidates.append(float(points[0]) - 1.0)
    else:
        candidates.append(0.5 * float(points[first - 1] + points[first]))
    candidates.extend(0.5 * (points[first:last] + points[first + 1 : last + 1]))
    if last == points.size - 1:
        candidates.append(float(points[-1]) + 1.0)
    else:
        candidates.append(0.5 * float(points[last] + points[last + 1]))

    best: tuple[int, int] | None = None
    best_score = -math.inf
    for tau in candidates:
        i = int(np.searchsorted(y_c, tau, side="left"))
        j = int(np.searchsorted(y_t_shifted, tau, side="left"))
        score = log_binomial_pmf(i, q, n_c) + log_binomial_pmf(j, q, n_t)
        if score > best_score:
            best_score = score
            best = (i, j)
    assert best is not None
    return best


def lr_test(
    control: OrderedSample, treatment: OrderedSample, spec: QuantileSpec, d: float
) -> LRTestResult:
    """LR test of the hypothesis that the treatment q-quantile exceeds the
    control q-quantile by exactly d.

    The statistic is the exact H at the constrained maximizer; under the
    null it is asymptotically chi-square with one degree of freedom, so
    the p-value is that distribution's tail beyond the statistic.
    """
    i_star, j_star = constrained_max_indexes(control, treatment, spec.q, d)
    stat = lr_statistic_exact(i_star, j_star, spec, control.n, treatment.n)
    return LRTestResult(
        d=d,
        statistic=stat.value,
        p_value=chi2_sf_1df(stat.value),
        i_star=i_star,
        j_star=j_star,
    )


def _deficits(q: float, n: int, lo: int, hi: int, exact: bool) -> np.ndarray:
    """Per-sample H contribution g(i) for i in [lo, hi], vectorized."""
    idx = np.arange(lo, hi + 1)
    if exact:
        k = max_likelihood_index(q, n)
        peak = log_binomial_pmf(k, q, n)
        logpmf = np.array([log_binomial_pmf(int(i), q, n) for i in idx])
        g = -2.0 * (logpmf - peak)
        return np.maximum(g, 0.0)
    return (idx - n * q) ** 2 / (n * q * (1.0 - q))


def _marginal_window(q: float, n: int, threshold: float, exact: bool) -> tuple[int, int]:
    """Index range [lo, hi] guaranteed to contain every accepted count.

    Starts from the bounding box of the asymptotic ellipse plus one index
    of slack. Under the exact statistic the deficit tails decay more
    slowly, so the edges move outward until the edge count itself is
    rejected; unimodality of the deficit makes that a proof that nothing
    beyond the edge is accepted.
    """
    center = n * q
    halfwidth = math.sqrt(threshold * n * q * (1.0 - q)) + 1.0
    lo = max(math.ceil(center - halfwidth), 0)
    hi = min(math.floor(center + halfwidth), n)
    if exact:
        k = max_likelihood_index(q, n)
        peak = log_binomial_pmf(k, q, n)

        def g(i: int) -> float:
            return -2.0 * (log_binomial_pmf(i, q, n) - peak)

        while lo > 0 and g(lo) < threshold:
            lo -= 1
        while hi < n and g(hi) < threshold:
            hi += 1
    return lo, hi


def conservative_ci(
    control: OrderedSample,
    treatment: OrderedSample,
    spec: QuantileSpec,
    use_exact: bool | None = None,
) -> ConfidenceInterval:
    """Confidence interval from the full acceptance-region search.

    The interval is (min, max) of y_t(j) - y_c(i) over all index pairs
    with H(i, j) strictly below the chi-square critical value. Accepted
    pairs touching index 0 carry no order statistic; they are excluded
    from the extremes and reported through the clamped_index flag.

    ``use_exact=None`` picks the exact statistic when both samples have
    at most 10,000 values and the asymptotic form above that.
    """
    n_c, n_t = control.n, treatment.n
    if use_exact is None:
        use_exact = max(n_c, n_t) <= 10_000
    q, alpha = spec.q, spec.alpha
    threshold = chi2_quantile_1df(alpha)

    i_lo, i_hi = _marginal_window(q, n_c, threshold, use_exact)
    j_lo, j_hi = _marginal_window(q, n_t, threshold, use_exact)
    g_c = _deficits(q, n_c, i_lo, i_hi, use_exact)
    g_t = _deficits(q, n_t, j_lo, j_hi, use_exact)

    lower = math.inf
    upper = -math.inf
    clamped = False
    for offset, i in enumerate(range(i_lo, i_hi + 1)):
        budget = threshold - g_c[offset]
        if budget <= 0.0:
            continue
        accepted = np.flatnonzero(g_t < budget)
        if accepted.size == 0:
            continue
        if i == 0:
            # Accepted cells exist on the i=0 row but y_c(0) is undefined.
            clamped = True
            continue
        j_first = j_lo + int(accepted[0])
        j_last = j_lo + int(accepted[-1])
        if j_first == 0:
            clamped = True
            if accepted.size == 1:
                continue
            j_first = j_lo + int(accepted[1])
        y_c_i = control.order_stat(i)
        lower = min(lower, treatment.order_stat(j_first) - y_c_i)
        upper = max(upper, treatment.order_stat(j_last) - y_c_i)

    if not math.isfinite(lower):
        raise DegenerateRegionError(
            "acceptance region contains no index pairs with defined order statistics"
        )
    flags = frozenset({"clamped_index"}) if clamped else frozenset()
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        alpha=alpha,
        method=Method.LR_CONSERVATIVE,
        flags=flags,
    )


def acceptance_grid(
    n_c: int, n_t: int, spec: QuantileSpec, use_exact: bool | None = None
) -> AcceptanceGrid:
    """H over every index pair in the marginal windows, with accept flags.

    Output is plot-ready: the accepted set is the integer ellipse (exactly
    under the asymptotic statistic, approximately under the exact one).
    """
    if n_c < 1 or n_t < 1:
        raise ValidationError("sample sizes must be >= 1")
    if use_exact is None:
        use_exact = max(n_c, n_t) <= 10_000
    threshold = chi2_quantile_1df(spec.alpha)
    i_lo, i_hi = _marginal_window(spec.q, n_c, threshold, use_exact)
    j_lo, j_hi = _marginal_window(spec.q, n_t, threshold, use_exact)
    g_c = _deficits(spec.q, n_c, i_lo, i_hi, use_exact)
    g_t = _deficits(spec.q, n_t, j_lo, j_hi, use_exact)

    rows: list[tuple[int, int, float, bool]] = []
    for io, i in enumerate(range(i_lo, i_hi + 1)):
        for jo, j in enumerate(range(j_lo, j_hi + 1)):
            h = float(g_c[io] + g_t[jo])
            rows.append((i, j, h, h < threshold))
    return AcceptanceGrid(rows=rows, alpha=spec.alpha, exact=use_exact)


def write_acceptance_grid_csv(grid: AcceptanceGrid, stream: IO[str]) -> None:
    """Serialize a grid as CSV: header i,j,h,accepted; booleans as 0/1."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["i", "j", "h", "accepted"])
    for i, j, h, accepted in grid.rows:
        writer.writerow([i, j, format(h, ".9g"), 1 if accepted else 0])
