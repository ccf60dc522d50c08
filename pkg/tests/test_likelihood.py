"""Log-pmf, LR statistic, and normal/chi-square quantile numerics."""

import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats

from quantdiff import (
    LRStatistic,
    QuantileSpec,
    chi2_quantile_1df,
    chi2_sf_1df,
    log_binomial_pmf,
    lr_statistic_asymptotic,
    lr_statistic_exact,
    normal_quantile,
)
from quantdiff.errors import ConsistencyError, DomainError, IndexOutOfRangeError

from oracles import exact_binom_pmf, exact_log_binom_pmf, mode_index


def _spec(q: float) -> QuantileSpec:
    return QuantileSpec(q=q, alpha=0.05)


class TestLogBinomialPmf:
    def test_simple_values(self):
        # C(1,0) * 0.5^0 * 0.5^1 = 0.5
        assert log_binomial_pmf(0, 0.5, 1) == pytest.approx(math.log(0.5), rel=1e-15)
        assert log_binomial_pmf(1, 0.5, 1) == pytest.approx(math.log(0.5), rel=1e-15)
        # C(2,1) * 0.5^2 = 0.5
        assert log_binomial_pmf(1, 0.5, 2) == pytest.approx(math.log(0.5), rel=1e-15)

    def test_central_value_frozen(self):
        # C(100,50) * 2^-100, computed with exact integer arithmetic
        assert log_binomial_pmf(50, 0.5, 100) == pytest.approx(
            -2.5308764039771035, abs=1e-12
        )
        assert math.exp(log_binomial_pmf(50, 0.5, 100)) == pytest.approx(
            0.07958923738717877, rel=1e-9
        )

    @pytest.mark.parametrize("n", [1, 7, 40, 250])
    @pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
    def test_against_exact_rational(self, n, q):
        # Fraction(q) is the exact binary rational the float input denotes,
        # so the big-integer result is an oracle for the lgamma-based one.
        for i in range(0, n + 1, max(1, n // 10)):
            got = log_binomial_pmf(i, q, n)
            want = exact_log_binom_pmf(i, n, Fraction(q))
            assert got == pytest.approx(want, abs=1e-10)

    def test_against_scipy(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(1, 5000))
            i = int(rng.integers(0, n + 1))
            q = float(rng.uniform(0.01, 0.99))
            assert log_binomial_pmf(i, q, n) == pytest.approx(
                scipy.stats.binom.logpmf(i, n, q), abs=1e-9
            )

    @pytest.mark.parametrize("n", [1, 10, 100, 1000])
    @pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
    def test_normalization(self, n, q):
        total = sum(math.exp(log_binomial_pmf(i, q, n)) for i in range(n + 1))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            log_binomial_pmf(0, 0.0, 10)
        with pytest.raises(DomainError):
            log_binomial_pmf(0, 1.0, 10)
        with pytest.raises(IndexOutOfRangeError):
            log_binomial_pmf(-1, 0.5, 10)
        with pytest.raises(IndexOutOfRangeError):
            log_binomial_pmf(11, 0.5, 10)


class TestLRStatistic:
    def test_zero_at_maximizers(self):
        s = lr_statistic_exact(51, 51, _spec(0.5), 101, 101)
        assert s.value == 0.0
        assert (s.i_star, s.j_star) == (51, 51)
        assert s.exact

    def test_known_exact_value(self):
        s = lr_statistic_exact(40, 60, _spec(0.5), 101, 101)
        assert s.value == pytest.approx(7.894706270389705, rel=1e-12)

    def test_exact_close_to_asymptotic_moderate_n(self):
        e = lr_statistic_exact(40, 60, _spec(0.5), 101, 101).value
        a = lr_statistic_asymptotic(40, 60, _spec(0.5), 101, 101).value
        assert a == pytest.approx(7.9405940594059405, rel=1e-12)
        assert abs(e - a) / a < 0.05

    def test_exact_close_to_asymptotic_large_n(self):
        n = 10_000
        e = lr_statistic_exact(5100, 4900, _spec(0.5), n, n).value
        a = lr_statistic_asymptotic(5100, 4900, _spec(0.5), n, n).value
        assert a == pytest.approx(8.0, rel=1e-12)
        assert abs(e - a) / a < 1e-3

    @pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("n", [5, 17, 60])
    def test_minimum_at_maximizer_exhaustive(self, q, n):
        k = mode_index(q, n)
        base = lr_statistic_exact(k, k, _spec(q), n, n).value
        assert base == 0.0
        for i in range(n + 1):
            got = lr_statistic_exact(i, k, _spec(q), n, n).value
            assert got >= 0.0
            if i != k:
                # strictly positive unless pmf ties exactly at the mode
                tie = exact_binom_pmf(i, n, Fraction(q)) == exact_binom_pmf(
                    k, n, Fraction(q)
                )
                assert tie or got > 0.0

    def test_asymmetric_sizes(self):
        s = lr_statistic_asymptotic(30, 90, _spec(0.5), 60, 180)
        want = (30 - 30) ** 2 / (60 * 0.25) + (90 - 90) ** 2 / (180 * 0.25)
        assert s.value == want == 0.0

    def test_nonnegative_invariant(self):
        with pytest.raises(ConsistencyError):
            LRStatistic(value=-1e-3, i_star=1, j_star=1, exact=True)


class TestNormalQuantile:
    def test_against_scipy(self):
        ps = np.concatenate(
            [
                np.linspace(1e-10, 1 - 1e-10, 2001),
                [1e-12, 1e-15, 1 - 1e-12, 0.02425, 1 - 0.02425],
            ]
        )
        for p in ps:
            got = normal_quantile(float(p))
            want = scipy.stats.norm.ppf(p)
            assert abs(got - want) <= 1e-8, (p, got, want)

    def test_symmetry(self):
        for p in (0.001, 0.1, 0.3, 0.45):
            assert normal_quantile(p) == pytest.approx(-normal_quantile(1 - p), abs=1e-12)

    def test_median_exact_zero(self):
        assert normal_quantile(0.5) == 0.0

    def test_domain(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(DomainError):
                normal_quantile(p)


class TestChiSquare1df:
    def test_frozen_quantiles(self):
        assert chi2_quantile_1df(0.05) == pytest.approx(3.8414588206941285, abs=1e-8)
        assert chi2_quantile_1df(0.01) == pytest.approx(6.634896601021217, abs=1e-8)

    def test_against_scipy_isf(self):
        for alpha in (0.2, 0.1, 0.05, 0.01, 0.001):
            assert chi2_quantile_1df(alpha) == pytest.approx(
                scipy.stats.chi2.isf(alpha, 1), abs=1e-8
            )

    def test_sf_against_scipy(self):
        for x in (0.0, 0.5, 1.0, 3.84, 10.0, 30.0):
            assert chi2_sf_1df(x) == pytest.approx(
                scipy.stats.chi2.sf(x, 1), abs=1e-12
            )

    def test_roundtrip(self):
        for alpha in (0.2, 0.1, 0.05, 0.01, 0.001):
            assert chi2_sf_1df(chi2_quantile_1df(alpha)) == pytest.approx(
                alpha, rel=1e-6
            )

    def test_near_one_alpha(self):
        assert chi2_quantile_1df(0.9999) == pytest.approx(0.0, abs=1e-4)

    def test_domain(self):
        with pytest.raises(DomainError):
            chi2_quantile_1df(0.0)
        with pytest.raises(DomainError):
            chi2_quantile_1df(1.5)
        with pytest.raises(DomainError):
            chi2_sf_1df(-0.5)
