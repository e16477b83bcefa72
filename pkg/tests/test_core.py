"""Core primitives against independent oracles.

Chi-square values are checked against closed forms (exponential series for
even df, error-function forms for odd df) rather than against the
implementation's own machinery.  Distances are checked against explicit
inverse-based computation.
"""

import math

import numpy as np
import pytest

from robustscatter import (
    ChiSquare,
    DataMatrix,
    DomainError,
    EstimatorKind,
    HSubset,
    LocationScatter,
    SingularMatrix,
    as_data_matrix,
    chi2_cdf,
    chi2_quantile,
    classical_estimate,
    consistency_factor_raw,
    consistency_factor_reweight,
    default_h,
    h_from_alpha,
    mahalanobis_all,
    sample_covariance,
    spd_log_det,
    statistical_distance,
    subset_stats,
)
from robustscatter.core import _consistency_scaling

from conftest import rng_for


class TestDataMatrix:
    def test_valid_construction(self):
        dm = DataMatrix(np.arange(6.0).reshape(3, 2), column_names=("a", "b"))
        assert dm.n == 3 and dm.p == 2
        assert dm.column_names == ("a", "b")

    def test_rejects_nan_and_inf(self):
        with pytest.raises(DomainError, match="row 1, column 0"):
            DataMatrix(np.array([[1.0, 2.0], [np.nan, 3.0]]))
        with pytest.raises(DomainError):
            DataMatrix(np.array([[1.0, np.inf]]))

    def test_rejects_wrong_shapes(self):
        with pytest.raises(DomainError):
            DataMatrix(np.zeros(3))
        with pytest.raises(DomainError):
            DataMatrix(np.zeros((0, 2)))
        with pytest.raises(DomainError):
            DataMatrix(np.zeros((2, 2)), column_names=("only_one",))

    def test_values_are_read_only(self):
        dm = as_data_matrix([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(ValueError):
            dm.values[0, 0] = 9.0


class TestStatisticalDistance:
    def test_identity_cov_is_euclidean(self):
        # 3-4-5 triangle: distance 5 exactly.
        d = statistical_distance([3.0, 4.0], [0.0, 0.0], np.eye(2))
        assert d == 5.0

    def test_diagonal_cov_rescales_axes(self):
        d = statistical_distance([2.0, 1.0], [0.0, 0.0], np.diag([4.0, 1.0]))
        assert d == pytest.approx(math.sqrt(2.0), abs=1e-15)

    def test_zero_at_center(self):
        mu = np.array([3.0, -1.0, 7.5])
        sigma = np.diag([2.0, 5.0, 0.5])
        assert statistical_distance(mu, mu, sigma) == 0.0

    def test_matches_explicit_inverse(self):
        rng = rng_for("distance-oracle")
        for _ in range(25):
            p = int(rng.integers(1, 6))
            a = rng.standard_normal((p + 3, p))
            sigma = a.T @ a
            x = rng.standard_normal(p)
            mu = rng.standard_normal(p)
            want = math.sqrt((x - mu) @ np.linalg.inv(sigma) @ (x - mu))
            got = statistical_distance(x, mu, sigma)
            assert got == pytest.approx(want, rel=1e-10)

    def test_singular_scatter_raises(self):
        with pytest.raises(SingularMatrix):
            statistical_distance([1.0, 1.0], [0.0, 0.0], np.ones((2, 2)))

    def test_pivot_rule_threshold(self):
        # Diagonal entry 1e-13 relative to 1.0 is below the 1e-12 pivot rule.
        with pytest.raises(SingularMatrix):
            statistical_distance([1.0, 1.0], [0.0, 0.0], np.diag([1.0, 1e-13]))
        d = statistical_distance([1.0, 1.0], [0.0, 0.0], np.diag([1.0, 1e-11]))
        assert np.isfinite(d)


class TestMahalanobisAll:
    def test_matches_per_row_distances(self):
        rng = rng_for("maha-all")
        x = rng.standard_normal((40, 3))
        mean = x.mean(axis=0)
        cov = sample_covariance(x)
        want = [statistical_distance(row, mean, cov) for row in x]
        assert np.allclose(mahalanobis_all(x), want, rtol=1e-12)

    def test_three_point_line(self):
        # Column {0, 1, 2}: mean 1, variance 1, so distances are {1, 0, 1}.
        d = mahalanobis_all(np.array([[0.0], [1.0], [2.0]]))
        assert np.allclose(d, [1.0, 0.0, 1.0], atol=1e-14)

    def test_square_corners_equidistant(self):
        x = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
        d = mahalanobis_all(x)
        assert np.allclose(d, d[0], rtol=1e-12)

    def test_affine_invariance(self):
        rng = rng_for("maha-affine")
        x = rng.standard_normal((50, 3))
        amat = rng.standard_normal((3, 3)) + np.eye(3)
        shift = rng.standard_normal(3)
        d0 = mahalanobis_all(x)
        d1 = mahalanobis_all(x @ amat.T + shift)
        assert np.allclose(d0, d1, rtol=1e-8)

    def test_singular_for_n_le_p(self):
        with pytest.raises(SingularMatrix):
            mahalanobis_all(np.eye(3))


class TestChiSquare:
    def test_quantile_df2_closed_form(self):
        # F_2(x) = 1 - exp(-x/2), so the 0.975 quantile is -2 ln 0.025.
        assert chi2_quantile(0.975, 2) == pytest.approx(-2.0 * math.log(0.025), rel=1e-12)
        assert chi2_quantile(0.5, 2) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)

    def test_cdf_even_df_series(self):
        # F_4(x) = 1 - exp(-x/2)(1 + x/2); F_6 adds x^2/8.
        for x in (0.5, 2.0 * math.log(2.0), 3.7, 11.0):
            assert chi2_cdf(x, 2) == pytest.approx(1.0 - math.exp(-x / 2.0), rel=1e-12)
            assert chi2_cdf(x, 4) == pytest.approx(
                1.0 - math.exp(-x / 2.0) * (1.0 + x / 2.0), rel=1e-12
            )
            assert chi2_cdf(x, 6) == pytest.approx(
                1.0 - math.exp(-x / 2.0) * (1.0 + x / 2.0 + x * x / 8.0), rel=1e-12
            )

    def test_cdf_odd_df_error_function_form(self):
        # F_1(x) = erf(sqrt(x/2)); F_3(x) = erf(sqrt(x/2)) - sqrt(2x/pi) e^{-x/2}.
        for x in (0.3, 1.0, 2.5, 8.0):
            f1 = math.erf(math.sqrt(x / 2.0))
            f3 = f1 - math.sqrt(2.0 * x / math.pi) * math.exp(-x / 2.0)
            assert chi2_cdf(x, 1) == pytest.approx(f1, rel=1e-12)
            assert chi2_cdf(x, 3) == pytest.approx(f3, rel=1e-12)

    def test_cdf_at_zero(self):
        for df in (1, 2, 3, 8):
            assert chi2_cdf(0.0, df) == 0.0

    def test_quantile_inverts_cdf(self):
        for df in (1, 2, 3, 5, 10, 30):
            for prob in (0.01, 0.25, 0.5, 0.75, 0.975, 0.999):
                assert chi2_cdf(chi2_quantile(prob, df), df) == pytest.approx(prob, rel=1e-10)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            chi2_cdf(-0.1, 2)
        with pytest.raises(DomainError):
            chi2_quantile(0.0, 2)
        with pytest.raises(DomainError):
            chi2_quantile(1.0, 2)
        with pytest.raises(DomainError):
            chi2_cdf(1.0, 0)

    def test_chisquare_object(self):
        dist = ChiSquare(df=4)
        assert dist.cdf(dist.quantile(0.3)) == pytest.approx(0.3, rel=1e-10)
        with pytest.raises(DomainError):
            ChiSquare(df=0)


class TestConsistencyFactor:
    def test_half_coverage_p2_closed_form(self):
        # alpha = 0.5, p = 2: the chi-square pieces collapse to
        # 0.5 / (1 - e^{-ln 2} (1 + ln 2)).
        want = 0.5 / (1.0 - math.exp(-math.log(2.0)) * (1.0 + math.log(2.0)))
        assert consistency_factor_raw(0.5, 2) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(3.2588913, abs=1e-6)

    def test_p1_against_error_function_oracle(self):
        # Independent route for p = 1: odd-df cdfs via erf, quantile by bisection.
        def cdf1(x):
            return math.erf(math.sqrt(x / 2.0))

        def cdf3(x):
            return cdf1(x) - math.sqrt(2.0 * x / math.pi) * math.exp(-x / 2.0)

        for alpha in (0.5, 0.6, 0.75, 0.9, 0.99):
            lo, hi = 0.0, 50.0
            for _ in range(200):
                mid = (lo + hi) / 2.0
                if cdf1(mid) < alpha:
                    lo = mid
                else:
                    hi = mid
            want = alpha / cdf3((lo + hi) / 2.0)
            assert consistency_factor_raw(alpha, 1) == pytest.approx(want, rel=1e-9)

    def test_full_coverage_is_one(self):
        assert consistency_factor_raw(1.0, 3) == 1.0

    def test_factor_exceeds_one_and_decreases_with_alpha(self):
        values = [consistency_factor_raw(a, 3) for a in (0.5, 0.6, 0.75, 0.9, 0.99)]
        assert all(v > 1.0 for v in values)
        assert values == sorted(values, reverse=True)

    def test_domain(self):
        with pytest.raises(DomainError):
            consistency_factor_raw(0.49, 2)
        with pytest.raises(DomainError):
            consistency_factor_raw(1.01, 2)
        with pytest.raises(DomainError):
            consistency_factor_raw(0.75, 0)

    def test_reweight_factor_matches_trimming_form(self):
        for p in (1, 2, 5, 13):
            want = 0.975 / chi2_cdf(chi2_quantile(0.975, p), p + 2)
            assert consistency_factor_reweight(p) == pytest.approx(want, rel=1e-12)

    def test_internal_scaling_extends_below_half(self):
        # The univariate solver admits h/n < 0.5; the internal scaling must
        # agree with the public factor on the shared domain.
        assert _consistency_scaling(0.75, 2) == consistency_factor_raw(0.75, 2)
        assert _consistency_scaling(0.2, 1) > consistency_factor_raw(0.5, 1)


class TestSubsetSizes:
    def test_default_h_examples(self):
        assert default_h(59, 2) == 31
        assert default_h(59, 13) == 36
        assert default_h(100, 5) == 53
        assert default_h(20, 2) == 11

    def test_h_from_alpha_endpoints_and_mid(self):
        assert h_from_alpha(59, 2, 0.5) == 31
        assert h_from_alpha(59, 2, 1.0) == 59
        assert h_from_alpha(59, 2, 0.75) == 45
        for n, p in ((40, 2), (101, 7), (60, 3)):
            assert h_from_alpha(n, p, 0.5) == default_h(n, p)
            assert h_from_alpha(n, p, 1.0) == n

    def test_h_from_alpha_monotone(self):
        hs = [h_from_alpha(200, 4, a) for a in np.linspace(0.5, 1.0, 26)]
        assert hs == sorted(hs)

    def test_domain(self):
        with pytest.raises(DomainError):
            h_from_alpha(50, 2, 0.4)


class TestSubsetStats:
    def test_hand_computed_example(self):
        x = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 3.0], [99.0, 99.0]])
        sub = subset_stats(x, [2, 0, 1])
        assert np.array_equal(sub.indices, [0, 1, 2])
        assert np.allclose(sub.mean, [1.0, 1.0])
        assert np.allclose(sub.cov, [[1.0, 0.0], [0.0, 3.0]])
        assert sub.log_det == pytest.approx(math.log(3.0), rel=1e-12)
        assert sub.h == 3

    def test_square_corners(self):
        x = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
        sub = subset_stats(x, [0, 1, 2, 3])
        assert np.array_equal(sub.mean, [1.0, 1.0])
        assert np.allclose(sub.cov, np.eye(2) * (4.0 / 3.0), rtol=1e-15)
        assert sub.log_det == pytest.approx(2.0 * math.log(4.0 / 3.0), rel=1e-12)

    def test_single_column_subset(self):
        sub = subset_stats(np.array([[9.0], [1.0], [2.0], [3.0]]), [1, 2, 3])
        assert sub.mean[0] == 2.0
        assert sub.cov[0, 0] == 1.0
        assert sub.log_det == 0.0

    def test_singular_subset_gets_minus_inf(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 1.0]])
        sub = subset_stats(x, [0, 1, 2])  # collinear
        assert sub.log_det == -math.inf
        dup = subset_stats(np.array([[4.0, 7.0], [4.0, 7.0], [0.0, 0.0]]), [0, 1])
        assert dup.log_det == -math.inf

    def test_validation(self):
        x = np.zeros((4, 2))
        with pytest.raises(DomainError):
            subset_stats(x, [1])
        with pytest.raises(DomainError):
            subset_stats(x, [0, 0, 1])
        with pytest.raises(DomainError):
            subset_stats(x, [0, 4])

    def test_log_det_matches_slogdet(self):
        rng = rng_for("subset-logdet")
        x = rng.standard_normal((30, 4))
        sub = subset_stats(x, range(12))
        sign, want = np.linalg.slogdet(sub.cov)
        assert sign == 1.0
        assert sub.log_det == pytest.approx(want, rel=1e-10)


class TestLocationScatter:
    def test_create_fills_log_det_and_symmetrizes(self):
        est = LocationScatter.create(
            [0.0, 0.0], np.diag([2.0, 3.0]), EstimatorKind.CLASSICAL, 10, 1.0,
            consistency_applied=False,
        )
        assert est.log_det == pytest.approx(math.log(6.0), rel=1e-12)
        assert est.p == 2

    def test_rejects_asymmetric_scatter(self):
        bad = np.array([[1.0, 0.5], [0.1, 1.0]])
        with pytest.raises(DomainError):
            LocationScatter.create([0.0, 0.0], bad, EstimatorKind.CLASSICAL, 5, 1.0,
                                   consistency_applied=False)

    def test_classical_estimate(self):
        rng = rng_for("classical")
        x = rng.standard_normal((25, 3))
        est = classical_estimate(x)
        assert est.kind is EstimatorKind.CLASSICAL
        assert est.h == 25 and est.alpha == 1.0
        assert np.allclose(est.center, x.mean(axis=0))
        assert np.allclose(est.scatter, np.cov(x, rowvar=False))


class TestSpdLogDet:
    def test_zero_matrix_is_singular(self):
        assert spd_log_det(np.zeros((2, 2))) == -math.inf

    def test_agrees_with_slogdet_on_random_spd(self):
        rng = rng_for("spd-logdet")
        for _ in range(20):
            p = int(rng.integers(1, 7))
            a = rng.standard_normal((p + 2, p))
            s = a.T @ a
            _, want = np.linalg.slogdet(s)
            assert spd_log_det(s) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_hsubset_indices_read_only():
    x = np.arange(12.0).reshape(6, 2) + rng_for("ro").standard_normal((6, 2))
    sub = subset_stats(x, [0, 2, 4])
    assert isinstance(sub, HSubset)
    with pytest.raises(ValueError):
        sub.indices[0] = 5
