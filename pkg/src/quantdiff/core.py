"""Sample containers, quantile/index arithmetic, and shared result types.

Order statistics use 1-based logical indexes throughout the public API:
``order_stat(1)`` is the sample minimum and ``order_stat(n)`` the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable

import numpy as np

from .errors import (
    ConsistencyError,
    DomainError,
    EmptySampleError,
    NonFiniteValueError,
    ValidationError,
)


class Method(str, Enum):
    """Tags identifying how a confidence interval was constructed."""

    LR_CONSERVATIVE = "lr_conservative"
    LR_TWO_STEP = "lr_two_step"
    PRICE_BONNET = "price_bonnet"
    DONNER_ZOU = "donner_zou"
    ONE_SAMPLE = "one_sample"


#: Canonical ordering of the two-sample methods, used by the CLI and the
#: simulation harness whenever output order must be deterministic.
TWO_SAMPLE_METHODS = (
    Method.LR_CONSERVATIVE,
    Method.LR_TWO_STEP,
    Method.PRICE_BONNET,
    Method.DONNER_ZOU,
)


def _check_probability(value: float, name: str) -> None:
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {value!r}")


@dataclass(frozen=True)
class QuantileSpec:
    """Target quantile ``q`` and two-sided significance level ``alpha``."""

    q: float
    alpha: float

    def __post_init__(self) -> None:
        _check_probability(self.q, "q")
        _check_probability(self.alpha, "alpha")


@dataclass(frozen=True, eq=False)
class OrderedSample:
    """A validated sample stored in ascending order.

    Construct via :func:`ingest_sample` (which sorts) or directly from
    already-sorted values. All values must be finite and ``n`` must equal
    the number of stored values.
    """

    values: np.ndarray
    n: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValidationError("sample values must be one-dimensional")
        if arr.size == 0:
            raise EmptySampleError("sample must contain at least one value")
        if self.n != arr.size:
            raise ValidationError(f"n={self.n} does not match {arr.size} stored values")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise NonFiniteValueError(f"non-finite value at sorted position {bad}")
        if np.any(np.diff(arr) < 0):
            raise ValidationError("sample values must be sorted ascending")
        object.__setattr__(self, "values", arr)
        arr.setflags(write=False)

    def order_stat(self, k: int) -> float:
        """Return the k-th smallest value, 1-based."""
        if not 1 <= k <= self.n:
            raise DomainError(f"order-statistic index {k} outside [1, {self.n}]")
        return float(self.values[k - 1])


def ingest_sample(raw_values: Iterable[float]) -> OrderedSample:
    """Validate and sort raw observations into an :class:`OrderedSample`.

    Raises
    ------
    EmptySampleError
        If no values are supplied.
    NonFiniteValueError
        If any value is NaN or infinite; the message names the offending
        position in the original input order.
    """
    try:
        arr = np.asarray(list(raw_values), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"sample values must be numeric: {exc}") from exc
    if arr.ndim != 1:
        raise ValidationError("sample values must be one-dimensional")
    if arr.size == 0:
        raise EmptySampleError("sample must contain at least one value")
    finite = np.isfinite(arr)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise NonFiniteValueError(f"non-finite value {arr[bad]!r} at input index {bad}")
    return OrderedSample(values=np.sort(arr), n=int(arr.size))


def read_sample_csv(source: str | IO[str], skip_header: bool = False) -> OrderedSample:
    """Read a one-value-per-line CSV file into an :class:`OrderedSample`.

    ``source`` may be a path, ``"-"`` for stdin, or an open text stream.
    Parse errors report the file name and 1-based line number.
    """
    import sys

    if isinstance(source, str):
        name = source
        if source == "-":
            return _parse_value_lines(sys.stdin, "<stdin>", skip_header)
        with open(source, "r", encoding="utf-8") as fh:
            return _parse_value_lines(fh, name, skip_header)
    return _parse_value_lines(source, getattr(source, "name", "<stream>"), skip_header)


def _parse_value_lines(lines: Iterable[str], name: str, skip_header: bool) -> OrderedSample:
    values = []
    for lineno, line in enumerate(lines, start=1):
        if lineno == 1 and skip_header:
            continue
        text = line.strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError as exc:
            raise ValidationError(f"{name}:{lineno}: not a number: {text!r}") from exc
        if not math.isfinite(value):
            raise NonFiniteValueError(f"{name}:{lineno}: non-finite value: {text!r}")
        values.append(value)
    if not values:
        raise EmptySampleError(f"{name}: no values found")
    return ingest_sample(values)


def max_likelihood_index(q: float, n: int) -> int:
    """Index of the binomial count maximizing the quantile likelihood.

    Returns ``floor(q * (n + 1))`` clamped into ``[0, n]``. A result of 0
    or ``n`` signals that the maximizer abuts the sample boundary.
    """
    _check_probability(q, "q")
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    k = math.floor(q * (n + 1))
    return min(max(k, 0), n)


def quantile_point_estimate(sample: OrderedSample, q: float) -> float:
    """Point estimate of the q-quantile.

    The quantile likelihood is flat on the open interval between two
    adjacent order statistics, so no unique maximizer exists; this returns
    the midpoint of the maximizing interval, falling back to the nearest
    sample point when the interval abuts a boundary.
    """
    k = max_likelihood_index(q, sample.n)
    if k == 0:
        return float(sample.values[0])
    if k == sample.n:
        return float(sample.values[-1])
    return 0.5 * (float(sample.values[k - 1]) + float(sample.values[k]))


def outward_index_interval(center: float, halfwidth: float, n: int) -> tuple[int, int, bool]:
    """Round a fractional index interval outward and clamp into [1, n].

    Returns ``(lower, upper, clamped)`` where ``clamped`` is True when
    either rounded endpoint fell outside [1, n]. Outward rounding (floor
    the lower endpoint, ceil the upper) can only widen the interval, so
    nominal coverage is preserved up to the clamp.
    """
    lo = math.floor(center - halfwidth)
    hi = math.ceil(center + halfwidth)
    clamped = lo < 1 or hi > n
    return max(lo, 1), min(hi, n), clamped


@dataclass(frozen=True)
class ConfidenceInterval:
    """A two-sided confidence interval with its method tag and diagnostics."""

    lower: float
    upper: float
    alpha: float
    method: Method
    flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not isinstance(self.method, Method):
            raise ValidationError(f"unknown method tag {self.method!r}")
        if self.lower > self.upper:
            raise ConsistencyError(
                f"interval bounds out of order: ({self.lower}, {self.upper})"
            )
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper
