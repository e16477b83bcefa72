"""Univariate estimator: sweep vs exhaustive enumeration, equivariance."""

import math

import numpy as np
import pytest

from robustscatter import (
    DomainError,
    InstanceTooLarge,
    lts_location,
    uni_mcd,
    uni_mcd_bruteforce,
)
from robustscatter.core import _consistency_scaling

from conftest import rng_for


class TestSweepMatchesBruteForce:
    def test_random_instances(self):
        rng = rng_for("uni-brute")
        for trial in range(40):
            n = int(rng.integers(5, 21))
            h = int(rng.integers(2, n + 1))
            x = rng.standard_normal(n) * float(rng.uniform(0.5, 20.0))
            fast = uni_mcd(x, h)
            slow = uni_mcd_bruteforce(x, h)
            assert fast.raw_variance == slow.raw_variance, (trial, n, h)
            assert fast.location == slow.location
            assert fast.subset_start == slow.subset_start
            assert fast.scale == slow.scale

    def test_contaminated_instances(self):
        rng = rng_for("uni-brute-contam")
        for _ in range(20):
            x = rng.standard_normal(15)
            x[:6] += 50.0
            fast = uni_mcd(x, 8)
            slow = uni_mcd_bruteforce(x, 8)
            assert fast.raw_variance == slow.raw_variance
            assert fast.location == slow.location

    def test_large_common_offset(self):
        # Cumulative sums on raw values would lose every significant digit
        # at this offset; the median shift keeps the sweep exact enough to
        # agree with the direct per-window scan.
        rng = rng_for("uni-offset")
        x = 1e8 + rng.standard_normal(20) * 1e-3
        fast = uni_mcd(x, 11)
        slow = uni_mcd_bruteforce(x, 11)
        assert fast.subset_start == slow.subset_start
        assert fast.raw_variance == slow.raw_variance
        assert fast.raw_variance > 0.0

    def test_first_window_wins_ties(self):
        # Three windows of variance 0.5; the leftmost is reported.
        x = np.array([10.0, 3.0, 1.0, 0.0, 2.0])
        result = uni_mcd(x, 2)
        assert result.subset_start == 0
        assert result.location == 0.5
        slow = uni_mcd_bruteforce(x, 2)
        assert slow.location == 0.5 and slow.subset_start == 0


class TestEquivariance:
    def test_affine(self):
        rng = rng_for("uni-affine")
        x = rng.standard_normal(60)
        base = uni_mcd(x, 35)
        for a, b in [(2.5, -7.0), (-3.0, 100.0), (0.01, 0.0)]:
            t = uni_mcd(a * x + b, 35)
            assert t.location == pytest.approx(a * base.location + b, rel=1e-10, abs=1e-10)
            assert t.scale == pytest.approx(abs(a) * base.scale, rel=1e-10)

    def test_resists_minority_contamination(self):
        rng = rng_for("uni-robust")
        x = rng.standard_normal(101)
        x[:49] = 1e6
        result = uni_mcd(x)
        assert abs(result.location) < 1.0
        assert result.scale < 10.0


class TestResultContract:
    def test_exact_fit(self):
        result = uni_mcd(np.array([5.0, 1.0, 5.0, 5.0, 5.0, 9.0]), 4)
        assert result.exact_fit
        assert result.scale == 0.0
        assert result.raw_variance == 0.0
        assert result.location == 5.0
        assert result.subset_start == 1

    def test_small_literal_windows(self):
        # {0, 1, 2, 10} with h = 3: the tight window is {0, 1, 2}.
        result = uni_mcd(np.array([0.0, 1.0, 2.0, 10.0]), 3)
        assert result.location == 1.0
        assert result.raw_variance == 1.0
        brute = uni_mcd_bruteforce(np.array([0.0, 1.0, 2.0, 10.0]), 3)
        assert (brute.location, brute.raw_variance) == (1.0, 1.0)

        whole = uni_mcd(np.array([-1.0, 0.0, 1.0]), 3)
        assert whole.location == 0.0
        assert whole.raw_variance == 1.0

        tied = uni_mcd(np.array([5.0, 5.0, 5.0, 9.0]), 2)
        assert tied.exact_fit and tied.scale == 0.0 and tied.location == 5.0

    def test_full_window_is_classical(self):
        x = rng_for("uni-full").standard_normal(37) * 3.0 + 1.0
        result = uni_mcd(x, 37)
        assert result.location == pytest.approx(float(np.mean(x)), rel=1e-14)
        assert result.raw_variance == pytest.approx(float(np.var(x, ddof=1)), rel=1e-12)
        # Full coverage needs no correction: the factor at alpha = 1 is one.
        assert result.scale == pytest.approx(math.sqrt(np.var(x, ddof=1)), rel=1e-12)

    def test_default_h_and_alpha(self):
        x = rng_for("uni-h").standard_normal(59)
        result = uni_mcd(x)
        assert result.h == 30 and result.n == 59
        assert result.alpha == pytest.approx(30 / 59)

    def test_scale_consistent_at_normal(self):
        # The scaled window standard deviation estimates the true sigma.
        x = rng_for("uni-consistency").standard_normal(5000)
        assert uni_mcd(x).scale == pytest.approx(1.0, abs=0.05)

    def test_scale_reproduces_factor(self):
        x = rng_for("uni-factor").standard_normal(30)
        result = uni_mcd(x, 20)
        factor = _consistency_scaling(20 / 30, 1)
        assert result.scale == math.sqrt(result.raw_variance * factor)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            uni_mcd(np.array([1.0]))
        x = rng_for("uni-domain").standard_normal(10)
        with pytest.raises(DomainError):
            uni_mcd(x, 1)
        with pytest.raises(DomainError):
            uni_mcd(x, 11)
        x[3] = np.nan
        with pytest.raises(DomainError):
            uni_mcd(x)

    def test_bruteforce_size_cap(self):
        with pytest.raises(InstanceTooLarge):
            uni_mcd_bruteforce(rng_for("uni-cap").standard_normal(21))


class TestLtsLocation:
    def test_matches_window_mean(self):
        rng = rng_for("lts")
        for _ in range(10):
            x = rng.standard_normal(40) + 3.0
            x[:5] -= 30.0
            assert lts_location(x, 25) == uni_mcd(x, 25).location
        assert lts_location(x) == uni_mcd(x).location

    def test_literal_examples(self):
        assert lts_location(np.array([-3.0, -1.0, 1.0, 3.0]), 4) == 0.0
        assert lts_location(np.array([0.0, 1.0, 2.0, 10.0]), 3) == 1.0
