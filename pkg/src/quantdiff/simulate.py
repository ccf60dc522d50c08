"""Seeded Monte Carlo coverage studies for the difference-in-quantile CIs.

Scenarios pair two closed-form distributions, so the true quantile
difference is known analytically and coverage is a simple containment
count. Every replication draws from its own counter-based substream keyed
by (master_seed, replication_index); results are therefore bit-identical
no matter how replications are scheduled, and the aggregation folds
per-replication records in index order so parallel runs reproduce the
sequential output exactly.
"""

from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .baselines import donner_zou_ci, price_bonnet_ci
from .core import (
    TWO_SAMPLE_METHODS,
    ConfidenceInterval,
    Method,
    OrderedSample,
    QuantileSpec,
    ingest_sample,
)
from .errors import DomainError, EstimationError, ValidationError
from .likelihood import normal_quantile
from .region import conservative_ci, lr_test
from .two_step import two_step_ci


class DistFamily(str, Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"


_PARAM_COUNT = {
    DistFamily.NORMAL: 2,
    DistFamily.LOGNORMAL: 2,
    DistFamily.EXPONENTIAL: 1,
    DistFamily.UNIFORM: 2,
}


@dataclass(frozen=True)
class Distribution:
    """A sampling distribution with closed-form quantiles.

    Families and parameters: normal(mu, sigma), lognormal(mu, sigma) with
    the parameters of the underlying normal, exponential(rate), and
    uniform(a, b).
    """

    family: DistFamily
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        family = DistFamily(self.family)
        object.__setattr__(self, "family", family)
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != _PARAM_COUNT[family]:
            raise DomainError(
                f"{family.value} takes {_PARAM_COUNT[family]} parameters, got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise DomainError(f"distribution parameters must be finite: {params}")
        if family in (DistFamily.NORMAL, DistFamily.LOGNORMAL) and params[1] <= 0.0:
            raise DomainError(f"sigma must be > 0, got {params[1]}")
        if family is DistFamily.EXPONENTIAL and params[0] <= 0.0:
            raise DomainError(f"rate must be > 0, got {params[0]}")
        if family is DistFamily.UNIFORM and params[1] <= params[0]:
            raise DomainError(f"uniform needs a < b, got {params}")

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "Distribution":
        return cls(DistFamily.NORMAL, (mu, sigma))

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "Distribution":
        return cls(DistFamily.LOGNORMAL, (mu, sigma))

    @classmethod
    def exponential(cls, rate: float) -> "Distribution":
        return cls(DistFamily.EXPONENTIAL, (rate,))

    @classmethod
    def uniform(cls, a: float, b: float) -> "Distribution":
        return cls(DistFamily.UNIFORM, (a, b))

    def __str__(self) -> str:
        args = ",".join(format(p, "g") for p in self.params)
        return f"{self.family.value}({args})"


_DIST_PATTERN = re.compile(r"^\s*([a-z]+)\s*\(([^()]*)\)\s*$")


def parse_distribution(text: str) -> Distribution:
    """Parse a spec like ``normal(0,1)`` or ``exponential(2)``."""
    match = _DIST_PATTERN.match(text)
    if match is None:
        raise ValidationError(
            f"cannot parse distribution {text!r}; expected e.g. normal(0,1)"
        )
    name, arg_text = match.groups()
    try:
        family = DistFamily(name)
    except ValueError:
        valid = ", ".join(f.value for f in DistFamily)
        raise ValidationError(f"unknown distribution {name!r}; valid: {valid}") from None
    try:
        params = tuple(float(a) for a in arg_text.split(","))
    except ValueError:
        raise ValidationError(f"bad distribution parameters in {text!r}") from None
    return Distribution(family, params)


def true_quantile(dist: Distribution, q: float) -> float:
    """Closed-form q-quantile of a scenario distribution."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if dist.family is DistFamily.NORMAL:
        mu, sigma = dist.params
        return mu + sigma * normal_quantile(q)
    if dist.family is DistFamily.LOGNORMAL:
        mu, sigma = dist.params
        return math.exp(mu + sigma * normal_quantile(q))
    if dist.family is DistFamily.EXPONENTIAL:
        (rate,) = dist.params
        return -math.log1p(-q) / rate
    a, b = dist.params
    return a + q * (b - a)


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation setting: two distributions, sizes, q, alpha, seed.

    ``true_delta`` is derived from the closed-form quantiles at
    construction and is not an input.
    """

    dist_c: Distribution
    dist_t: Distribution
    n_c: int
    n_t: int
    q: float
    alpha: float
    replications: int
    master_seed: int
    true_delta: float = field(init=False)

    def __post_init__(self) -> None:
        QuantileSpec(self.q, self.alpha)  # domain checks
        if self.n_c < 1 or self.n_t < 1:
            raise DomainError("sample sizes must be >= 1")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not (0 <= self.master_seed < 2**64):
            raise DomainError("master_seed must fit in an unsigned 64-bit integer")
        delta = true_quantile(self.dist_t, self.q) - true_quantile(self.dist_c, self.q)
        object.__setattr__(self, "true_delta", delta)


@dataclass(frozen=True)
class CoverageRow:
    """Aggregated results for one method within one scenario."""

    method: Method
    coverage: float
    mean_width: float
    reject_rate_at_true_d: float
    mc_stderr: float
    failures: int


def _draw(rng: np.random.Generator, dist: Distribution, n: int) -> np.ndarray:
    if dist.family is DistFamily.NORMAL:
        return rng.normal(dist.params[0], dist.params[1], size=n)
    if dist.family is DistFamily.LOGNORMAL:
        return rng.lognormal(dist.params[0], dist.params[1], size=n)
    if dist.family is DistFamily.EXPONENTIAL:
        return rng.exponential(scale=1.0 / dist.params[0], size=n)
    return rng.uniform(dist.params[0], dist.params[1], size=n)


def generate_pair(
    spec: ScenarioSpec, replication_index: int
) -> tuple[OrderedSample, OrderedSample]:
    """Draw one (control, treatment) pair from its dedicated substream.

    The stream is keyed by (master_seed, replication_index), so any
    replication can be regenerated in isolation and execution order never
    affects the draws.
    """
    if not (0 <= replication_index < spec.replications):
        raise DomainError(
            f"replication index {replication_index} outside [0, {spec.replications})"
        )
    seed_seq = np.random.SeedSequence(entropy=(spec.master_seed, replication_index))
    rng = np.random.Generator(np.random.Philox(seed_seq))
    control = ingest_sample(_draw(rng, spec.dist_c, spec.n_c))
    treatment = ingest_sample(_draw(rng, spec.dist_t, spec.n_t))
    return control, treatment


def _compute_ci(
    method: Method,
    control: OrderedSample,
    treatment: OrderedSample,
    qspec: QuantileSpec,
) -> ConfidenceInterval:
    if method is Method.LR_CONSERVATIVE:
        return conservative_ci(control, treatment, qspec)
    if method is Method.LR_TWO_STEP:
        return two_step_ci(control, treatment, qspec)
    if method is Method.PRICE_BONNET:
        return price_bonnet_ci(control, treatment, qspec)
    if method is Method.DONNER_ZOU:
        return donner_zou_ci(control, treatment, qspec)
    raise ValidationError(f"method {method} has no two-sample interval")


def _replication_records(
    spec: ScenarioSpec, methods: tuple[Method, ...], replication_index: int
) -> tuple[list[tuple[bool, float, bool]], bool]:
    """(contained, width, failed) per method, plus the LR-test rejection."""
    control, treatment = generate_pair(spec, replication_index)
    qspec = QuantileSpec(spec.q, spec.alpha)
    records: list[tuple[bool, float, bool]] = []
    for method in methods:
        try:
            ci = _compute_ci(method, control, treatment, qspec)
        except EstimationError:
            records.append((False, 0.0, True))
        else:
            records.append((ci.contains(spec.true_delta), ci.width, False))
    test = lr_test(control, treatment, qspec, spec.true_delta)
    return records, test.rejects_at(spec.alpha)


def _normalize_methods(methods: Iterable[Method | str]) -> tuple[Method, ...]:
    requested = {Method(m) for m in methods}
    if Method.ONE_SAMPLE in requested:
        raise ValidationError(
            "one_sample is a single-sample building block; coverage of the "
            "quantile difference is defined for the two-sample methods only"
        )
    ordered = tuple(m for m in TWO_SAMPLE_METHODS if m in requested)
    if not ordered:
        raise ValidationError("no methods requested")
    return ordered


def run_coverage_study(
    spec: ScenarioSpec, methods: Iterable[Method | str], jobs: int = 1
) -> list[CoverageRow]:
    """Run the scenario and aggregate one CoverageRow per method.

    Replications that raise an estimation error for a method count into
    that method's ``failures`` and drop out of its coverage and width
    denominators. The LR-test rejection rate at d = true_delta is shared
    by all rows since the test is method-independent.

    ``jobs`` > 1 distributes replications over worker processes; the
    output is identical to the sequential run.
    """
    method_tuple = _normalize_methods(methods)
    if jobs < 1:
        raise DomainError(f"jobs must be >= 1, got {jobs}")

    indices = range(spec.replications)
    if jobs == 1:
        results = [_replication_records(spec, method_tuple, r) for r in indices]
    else:
        chunk = max(1, spec.replications // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(
                    _replication_worker,
                    ((spec, method_tuple, r) for r in indices),
                    chunksize=chunk,
                )
            )

    reject_count = 0
    contained = [0] * len(method_tuple)
    width_sum = [0.0] * len(method_tuple)
    failures = [0] * len(method_tuple)
    for records, rejected in results:
        reject_count += rejected
        for pos, (is_in, width, failed) in enumerate(records):
            if failed:
                failures[pos] += 1
            else:
                contained[pos] += is_in
                width_sum[pos] += width

    reject_rate = reject_count / spec.replications
    rows = []
    for pos, method in enumerate(method_tuple):
        successes = spec.replications - failures[pos]
        if successes > 0:
            coverage = contained[pos] / successes
            mean_width = width_sum[pos] / successes
            stderr = math.sqrt(coverage * (1.0 - coverage) / successes)
        else:
            coverage = math.nan
            mean_width = math.nan
            stderr = math.nan
        rows.append(
            CoverageRow(
                method=method,
                coverage=coverage,
                mean_width=mean_width,
                reject_rate_at_true_d=reject_rate,
                mc_stderr=stderr,
                failures=failures[pos],
            )
        )
    return rows


def _replication_worker(
    args: tuple[ScenarioSpec, tuple[Method, ...], int],
) -> tuple[list[tuple[bool, float, bool]], bool]:
    return _replication_records(*args)


COVERAGE_CSV_HEADER = (
    "method,coverage,mean_width,reject_rate,mc_stderr,failures,"
    "n_c,n_t,q,alpha,dist_c,dist_t,seed,replications"
)


def write_coverage_csv(
    spec: ScenarioSpec, rows: Sequence[CoverageRow], stream: IO[str]
) -> None:
    """Serialize coverage rows with their scenario columns, 6 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COVERAGE_CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(
            [
                row.method.value,
                format(row.coverage, ".6g"),
                format(row.mean_width, ".6g"),
                format(row.reject_rate_at_true_d, ".6g"),
                format(row.mc_stderr, ".6g"),
                row.failures,
                spec.n_c,
                spec.n_t,
                format(spec.q, ".6g"),
                format(spec.alpha, ".6g"),
                str(spec.dist_c),
                str(spec.dist_t),
                spec.master_seed,
                spec.replications,
            ]
        )
