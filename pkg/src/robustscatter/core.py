"""Core types and numeric primitives shared by every estimator.

Provides the data containers (:class:`DataMatrix`, :class:`HSubset`,
:class:`LocationScatter`), statistical distances, chi-square cdf/quantile,
consistency factors for trimmed covariance estimates, and the
log-determinant bookkeeping used throughout the package.

All covariances are sample covariances with divisor ``m - 1`` for ``m``
rows.  A matrix counts as numerically singular when a Cholesky pivot falls
below ``1e-12`` times its largest diagonal entry; singular subsets carry a
log-determinant of ``-inf`` so that subset objectives stay totally ordered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammainc, gammaincinv

from .errors import DomainError, SingularMatrix

__all__ = [
    "SINGULARITY_RTOL",
    "DataMatrix",
    "as_data_matrix",
    "EstimatorKind",
    "LocationScatter",
    "HSubset",
    "ChiSquare",
    "subset_stats",
    "sample_covariance",
    "spd_log_det",
    "statistical_distance",
    "mahalanobis_all",
    "chi2_cdf",
    "chi2_quantile",
    "consistency_factor_raw",
    "consistency_factor_reweight",
    "default_h",
    "h_from_alpha",
    "classical_estimate",
]

# Cholesky pivot below this fraction of the largest diagonal entry: singular.
SINGULARITY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# data containers


@dataclass(frozen=True)
class DataMatrix:
    """An n-by-p matrix of observations, rows first.

    Construction validates shape and finiteness: the array must be 2-D with
    at least one row and one column, and every entry must be finite.  NaN or
    infinite cells are rejected here so that no estimator downstream has to
    re-check.

    Parameters
    ----------
    values : ndarray of shape (n, p)
        Observation matrix, coerced to float64.
    column_names : tuple of str, optional
        Labels for the p columns; purely informational.
    """

    values: np.ndarray
    column_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise DomainError(f"expected a 2-D matrix, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError(f"matrix must have at least one row and column, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise DomainError(
                f"non-finite entry at row {bad[0]}, column {bad[1]}; "
                "NaN and infinity are not admitted"
            )
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != arr.shape[1]:
                raise DomainError(
                    f"{len(names)} column names for {arr.shape[1]} columns"
                )
            object.__setattr__(self, "column_names", names)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def as_data_matrix(data: DataMatrix | np.ndarray | Sequence) -> DataMatrix:
    """Coerce an array-like to a validated :class:`DataMatrix` (no-op if already one)."""
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=np.float64))


class EstimatorKind(str, Enum):
    """Which estimator produced a :class:`LocationScatter`."""

    RAW_MCD = "raw_mcd"
    WEIGHTED_MCD = "weighted_mcd"
    UNI_MCD = "uni_mcd"
    MRCD = "mrcd"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class LocationScatter:
    """A location vector with a matching scatter matrix.

    ``scatter`` is symmetric (enforced to 1e-12 relative agreement on
    construction) and positive definite except for exact fits, where it is
    singular, ``log_det`` is ``-inf`` and ``exact_fit`` is set.

    Attributes
    ----------
    center : ndarray of shape (p,)
    scatter : ndarray of shape (p, p)
    log_det : float
        Log-determinant of ``scatter``; ``-inf`` for an exact fit.
    kind : EstimatorKind
    h : int
        Subset size the estimate is based on (n for classical).
    alpha : float
        Coverage h/n.
    consistency_applied : bool
        Whether Gaussian consistency scaling is included in ``scatter``.
    c0 : float
        Raw consistency factor applied (1.0 when none).
    c1 : float or None
        Reweighting factor, present only on weighted estimates.
    support : ndarray or None
        Row indices that back the estimate (the h-subset, or the rows with
        positive weight for a weighted estimate).
    exact_fit : bool
        True when the estimate sits on a lower-dimensional hyperplane.
    """

    center: np.ndarray
    scatter: np.ndarray
    log_det: float
    kind: EstimatorKind
    h: int
    alpha: float
    consistency_applied: bool
    c0: float = 1.0
    c1: float | None = None
    support: np.ndarray | None = None
    exact_fit: bool = False

    @property
    def p(self) -> int:
        return self.center.shape[0]

    @classmethod
    def create(
        cls,
        center: np.ndarray,
        scatter: np.ndarray,
        kind: EstimatorKind,
        h: int,
        alpha: float,
        *,
        consistency_applied: bool,
        c0: float = 1.0,
        c1: float | None = None,
        support: np.ndarray | None = None,
        exact_fit: bool = False,
        log_det: float | None = None,
    ) -> "LocationScatter":
        """Build an estimate, symmetrizing the scatter and filling in ``log_det``.

        Raises :class:`DomainError` when the scatter is asymmetric beyond
        1e-12 relative, or when shapes disagree.
        """
        center = np.asarray(center, dtype=np.float64).reshape(-1)
        scatter = np.asarray(scatter, dtype=np.float64)
        p = center.shape[0]
        if scatter.shape != (p, p):
            raise DomainError(f"scatter shape {scatter.shape} does not match center length {p}")
        scale = float(np.max(np.abs(scatter))) or 1.0
        asym = float(np.max(np.abs(scatter - scatter.T)))
        if asym > 1e-12 * scale:
            raise DomainError(f"scatter asymmetric beyond tolerance: {asym:.3e} vs scale {scale:.3e}")
        scatter = (scatter + scatter.T) / 2.0
        if log_det is None:
            log_det = spd_log_det(scatter)
        if support is not None:
            support = np.asarray(support, dtype=np.intp)
        return cls(
            center=center,
            scatter=scatter,
            log_det=float(log_det),
            kind=kind,
            h=int(h),
            alpha=float(alpha),
            consistency_applied=bool(consistency_applied),
            c0=float(c0),
            c1=None if c1 is None else float(c1),
            support=support,
            exact_fit=bool(exact_fit),
        )


@dataclass(frozen=True)
class HSubset:
    """Statistics of one h-subset of rows: sorted indices, mean, covariance.

    ``log_det`` is the log-determinant of ``cov`` under the pivot rule,
    ``-inf`` when the subset covariance is singular.
    """

    indices: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    log_det: float

    @property
    def h(self) -> int:
        return self.indices.shape[0]


# ---------------------------------------------------------------------------
# linear algebra helpers


def sample_covariance(values: np.ndarray) -> np.ndarray:
    """Sample covariance (divisor m-1) of the rows of ``values``; always (p, p)."""
    resid = values - values.mean(axis=0)
    return resid.T @ resid / (values.shape[0] - 1)


def _try_cholesky(matrix: np.ndarray) -> np.ndarray | None:
    """Lower Cholesky factor, or None when singular under the pivot rule."""
    diag = np.diagonal(matrix)
    scale = float(np.max(diag, initial=0.0))
    if scale <= 0.0 or not np.isfinite(scale):
        return None
    try:
        lower = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return None
    pivots = np.diagonal(lower) ** 2
    if float(np.min(pivots)) < SINGULARITY_RTOL * scale:
        return None
    return lower


def spd_log_det(matrix: np.ndarray) -> float:
    """Log-determinant of a symmetric PSD matrix; ``-inf`` when singular."""
    lower = _try_cholesky(matrix)
    if lower is None:
        return -math.inf
    return 2.0 * float(np.sum(np.log(np.diagonal(lower))))


def _squared_distances(values: np.ndarray, mean: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Squared statistical distances of all rows given a Cholesky factor."""
    resid = (values - mean).T
    y = solve_triangular(lower, resid, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", y, y)


def statistical_distance(x: np.ndarray, center: np.ndarray, scatter: np.ndarray) -> float:
    """Statistical distance sqrt((x-c)' S^{-1} (x-c)), via a Cholesky solve.

    Raises :class:`SingularMatrix` when ``scatter`` fails the pivot rule.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    center = np.asarray(center, dtype=np.float64).reshape(-1)
    scatter = np.asarray(scatter, dtype=np.float64)
    if x.shape != center.shape or scatter.shape != (x.shape[0], x.shape[0]):
        raise DomainError("x, center and scatter have incompatible shapes")
    lower = _try_cholesky(scatter)
    if lower is None:
        raise SingularMatrix("scatter matrix is numerically singular")
    y = solve_triangular(lower, x - center, lower=True, check_finite=False)
    return float(np.sqrt(y @ y))


def mahalanobis_all(data: DataMatrix | np.ndarray) -> np.ndarray:
    """Classical Mahalanobis distance of every row from the sample mean.

    Uses the sample mean and sample covariance of the full data.  Raises
    :class:`SingularMatrix` when the sample covariance is singular (always
    the case for n <= p).
    """
    dm = as_data_matrix(data)
    if dm.n <= dm.p:
        raise SingularMatrix(
            f"sample covariance of n={dm.n} rows in {dm.p} dimensions is singular"
        )
    mean = dm.values.mean(axis=0)
    cov = sample_covariance(dm.values)
    lower = _try_cholesky(cov)
    if lower is None:
        raise SingularMatrix("sample covariance is numerically singular")
    return np.sqrt(_squared_distances(dm.values, mean, lower))


# ---------------------------------------------------------------------------
# chi-square distribution


def chi2_cdf(x: float, df: int) -> float:
    """Chi-square cdf with ``df`` degrees of freedom at ``x >= 0``."""
    df = _check_df(df)
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"chi-square cdf argument must be nonnegative, got {x}")
    return float(gammainc(df / 2.0, x / 2.0))


def chi2_quantile(prob: float, df: int) -> float:
    """Chi-square quantile: the x with cdf(x) = prob, for prob in (0, 1)."""
    df = _check_df(df)
    prob = float(prob)
    if not 0.0 < prob < 1.0:
        raise DomainError(f"quantile probability must lie in (0, 1), got {prob}")
    return float(2.0 * gammaincinv(df / 2.0, prob))


def _check_df(df: int) -> int:
    if df != int(df) or int(df) < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    return int(df)


@dataclass(frozen=True)
class ChiSquare:
    """Chi-square distribution with a fixed positive integer ``df``."""

    df: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "df", _check_df(self.df))

    def cdf(self, x: float) -> float:
        return chi2_cdf(x, self.df)

    def quantile(self, prob: float) -> float:
        return chi2_quantile(prob, self.df)


# ---------------------------------------------------------------------------
# consistency factors and subset sizes


def _consistency_scaling(alpha: float, p: int) -> float:
    # alpha in (0, 1]: Gaussian consistency for keeping the alpha-fraction
    # of smallest squared distances; alpha / F_{p+2}(F_p^{-1}(alpha)).
    if alpha >= 1.0:
        return 1.0
    q = chi2_quantile(alpha, p)
    return alpha / chi2_cdf(q, p + 2)


def consistency_factor_raw(alpha: float, p: int) -> float:
    """Consistency factor for the raw trimmed covariance at coverage ``alpha``.

    The factor that rescales the covariance of the best h-subset so the
    estimate is consistent for the true covariance under Gaussian data.
    ``alpha`` is the coverage h/n and must lie in [0.5, 1]; ``alpha = 1``
    returns exactly 1.0.

    Raises :class:`DomainError` for alpha outside [0.5, 1] or p < 1.
    """
    p = _check_df(p)
    alpha = float(alpha)
    if not 0.5 <= alpha <= 1.0:
        raise DomainError(f"coverage alpha must lie in [0.5, 1], got {alpha}")
    return _consistency_scaling(alpha, p)


def consistency_factor_reweight(p: int, cutoff_prob: float = 0.975) -> float:
    """Cutoff part of the reweighting factor: consistency for hard rejection
    beyond the ``cutoff_prob`` chi-square quantile."""
    p = _check_df(p)
    cutoff_prob = float(cutoff_prob)
    if not 0.0 < cutoff_prob < 1.0:
        raise DomainError(f"cutoff probability must lie in (0, 1), got {cutoff_prob}")
    return _consistency_scaling(cutoff_prob, p)


def default_h(n: int, p: int) -> int:
    """Default subset size floor((n + p + 1) / 2): maximal breakdown point."""
    return (int(n) + int(p) + 1) // 2


def h_from_alpha(n: int, p: int, alpha: float) -> int:
    """Subset size for a requested coverage alpha in [0.5, 1].

    Interpolates between the maximal-breakdown size at alpha = 0.5 and n at
    alpha = 1: h = floor(2*h_min - n + 2*(n - h_min)*alpha).
    """
    alpha = float(alpha)
    if not 0.5 <= alpha <= 1.0:
        raise DomainError(f"coverage alpha must lie in [0.5, 1], got {alpha}")
    hmin = default_h(n, p)
    return int(math.floor(2 * hmin - n + 2 * (n - hmin) * alpha))


# ---------------------------------------------------------------------------
# subset statistics


def subset_stats(data: DataMatrix | np.ndarray, indices: Iterable[int]) -> HSubset:
    """Mean, sample covariance and log-determinant of a subset of rows.

    ``indices`` must be distinct, in range, and of size at least 2.  A
    singular subset covariance is not an error: it is reported through
    ``log_det = -inf``.
    """
    dm = as_data_matrix(data)
    idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices)
    if idx.ndim != 1 or idx.shape[0] < 2:
        raise DomainError(f"subset must contain at least 2 indices, got {idx.shape}")
    idx = idx.astype(np.intp, casting="same_kind")
    if np.unique(idx).shape[0] != idx.shape[0]:
        raise DomainError("subset indices must be distinct")
    if idx.min() < 0 or idx.max() >= dm.n:
        raise DomainError(f"subset indices must lie in [0, {dm.n})")
    idx = np.sort(idx)
    idx.flags.writeable = False
    rows = dm.values[idx]
    mean = rows.mean(axis=0)
    cov = sample_covariance(rows)
    return HSubset(indices=idx, mean=mean, cov=cov, log_det=spd_log_det(cov))


def classical_estimate(data: DataMatrix | np.ndarray) -> LocationScatter:
    """Sample mean and sample covariance packaged as a LocationScatter."""
    dm = as_data_matrix(data)
    if dm.n < 2:
        raise DomainError("classical estimate needs at least 2 rows")
    mean = dm.values.mean(axis=0)
    cov = sample_covariance(dm.values)
    return LocationScatter.create(
        mean,
        cov,
        EstimatorKind.CLASSICAL,
        dm.n,
        1.0,
        consistency_applied=False,
        support=np.arange(dm.n),
    )
