"""Deterministic minimum covariance determinant search.

Instead of random starts, six fixed robust initial scatters are computed on
robustly standardized data, each is refined into a full location/scatter
start, and each start is concentrated to convergence.  The smallest final
determinant wins.  No randomness enters at any point, and every selection
breaks ties by (distance, row values lexicographically, row index), which
makes the result invariant under row permutation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .core import (
    DataMatrix,
    EstimatorKind,
    HSubset,
    LocationScatter,
    _squared_distances,
    _try_cholesky,
    as_data_matrix,
    consistency_factor_raw,
    default_h,
    sample_covariance,
    subset_stats,
)
from .cstep import ConcentrationResult, concentrate, select_smallest
from .errors import DegenerateData, DomainError, ZeroScale

__all__ = [
    "QN_CONSTANT",
    "StandardizedData",
    "InitialEstimate",
    "qn_scale",
    "standardize",
    "initial_scatters",
    "refine_scatter",
    "det_mcd",
    "det_mcd_range",
]

# Gaussian consistency constant for the pairwise-difference scale.
QN_CONSTANT = 2.2219


def qn_scale(x: np.ndarray) -> float:
    """Pairwise-difference scale estimate of a sample.

    The k-th smallest of the n*(n-1)/2 absolute pairwise differences,
    k = C(floor(n/2) + 1, 2), scaled by 2.2219 for Gaussian consistency.
    Insensitive to up to half the sample being replaced.  O(n^2) time.

    Raises :class:`DomainError` for fewer than 2 values and
    :class:`ZeroScale` when the k-th difference is exactly zero (at least
    half the sample is tied).
    """
    value = _qn_statistic(x)
    if value == 0.0:
        raise ZeroScale("pairwise-difference scale is zero: majority of values tied")
    return value


def _qn_statistic(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise DomainError(f"scale estimate needs at least 2 values, got {n}")
    k = math.comb(n // 2 + 1, 2)
    diffs = np.empty(n * (n - 1) // 2)
    pos = 0
    for i in range(n - 1):
        m = n - 1 - i
        np.abs(x[i + 1 :] - x[i], out=diffs[pos : pos + m])
        pos += m
    kth = float(np.partition(diffs, k - 1)[k - 1])
    return QN_CONSTANT * kth


def _qn_allow_zero(x: np.ndarray) -> float:
    # Off-diagonal scale identities legitimately hit zero spread.
    return _qn_statistic(x)


_QN_CELL_BUDGET = 1 << 24  # ~134 MB of float64 scratch for pairwise differences


def _qn_columns(mat: np.ndarray) -> np.ndarray:
    """Raw pairwise-difference scale of every column, vectorized in blocks.

    Selects the same order statistic as :func:`_qn_statistic` column by
    column, so results are identical; zero scales are returned as zero and
    the caller enforces its own policy.
    """
    mat = np.asarray(mat, dtype=np.float64)
    n, m = mat.shape
    if n < 2:
        raise DomainError(f"scale estimate needs at least 2 values, got {n}")
    k = math.comb(n // 2 + 1, 2)
    r = n * (n - 1) // 2
    block = max(1, _QN_CELL_BUDGET // r)
    out = np.empty(m)
    if block == 1:
        for j in range(m):
            out[j] = _qn_statistic(mat[:, j])
        return out
    iu, ju = np.triu_indices(n, 1)
    for start in range(0, m, block):
        # One contiguous row of pairwise differences per column keeps the
        # selection cache-friendly.
        chunk = np.ascontiguousarray(mat[:, start : start + block].T)
        diffs = chunk[:, iu]
        diffs -= chunk[:, ju]
        np.abs(diffs, out=diffs)
        out[start : start + block] = np.partition(diffs, k - 1, axis=1)[:, k - 1]
    return QN_CONSTANT * out


@dataclass(frozen=True)
class StandardizedData:
    """Columnwise robust standardization z = (x - median) / qn."""

    z: np.ndarray
    medians: np.ndarray
    scales: np.ndarray


def standardize(data: DataMatrix | np.ndarray) -> StandardizedData:
    """Standardize each column by its median and pairwise-difference scale.

    Raises :class:`ZeroScale` (naming the column) when any column has zero
    robust scale.
    """
    dm = as_data_matrix(data)
    medians = np.median(dm.values, axis=0)
    scales = _qn_columns(dm.values)
    zeros = np.flatnonzero(scales == 0.0)
    if zeros.size:
        raise ZeroScale(f"column {zeros[0]} has zero robust scale")
    return StandardizedData(z=(dm.values - medians) / scales, medians=medians, scales=scales)


@dataclass(frozen=True)
class InitialEstimate:
    """A refined start: candidate index, location and scatter (standardized scale)."""

    index: int
    center: np.ndarray
    scatter: np.ndarray


def _pearson_corr(columns: np.ndarray) -> np.ndarray:
    centered = columns - columns.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    if np.any(norms == 0.0):
        raise ZeroScale("constant column in correlation computation")
    unit = centered / norms
    corr = unit.T @ unit
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr


def _hyperbolic_corr(z: np.ndarray) -> np.ndarray:
    return _pearson_corr(np.tanh(z))


def _rank_corr(z: np.ndarray) -> np.ndarray:
    return _pearson_corr(rankdata(z, axis=0))


def _normal_scores_corr(z: np.ndarray) -> np.ndarray:
    n = z.shape[0]
    ranks = rankdata(z, axis=0)
    return _pearson_corr(ndtri((ranks - 1.0 / 3.0) / (n + 1.0 / 3.0)))


def _spatial_sign_cov(z: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    k = np.divide(z, norms[:, None], out=np.zeros_like(z), where=norms[:, None] > 0.0)
    s = k.T @ k / z.shape[0]
    return (s + s.T) / 2.0


def _first_half_cov(z: np.ndarray) -> np.ndarray:
    # Covariance of the ceil(n/2) rows with smallest norm.
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    keep = select_smallest(norms, (z.shape[0] + 1) // 2, tie_values=z)
    return sample_covariance(z[keep])


def _orthogonalized_pairwise_cov(z: np.ndarray) -> np.ndarray:
    # Pairwise scale-identity covariances, eigendecomposed, with variances
    # re-estimated in the eigenbasis and transformed back.
    n, p = z.shape
    d = _qn_columns(z)
    if np.any(d == 0.0):
        raise ZeroScale("pairwise-difference scale is zero: majority of values tied")
    u = z / d
    diag = _qn_columns(u)
    if np.any(diag == 0.0):
        raise ZeroScale("pairwise-difference scale is zero: majority of values tied")
    omega = np.empty((p, p))
    omega[np.diag_indices(p)] = diag**2
    iu, ju = np.triu_indices(p, 1)
    pair_block = max(1, (1 << 22) // n)
    for start in range(0, iu.size, pair_block):
        ii = iu[start : start + pair_block]
        jj = ju[start : start + pair_block]
        splus = _qn_columns(u[:, ii] + u[:, jj])
        sminus = _qn_columns(u[:, ii] - u[:, jj])
        omega[ii, jj] = 0.25 * (splus**2 - sminus**2)
    omega[ju, iu] = omega[iu, ju]
    _, vectors = np.linalg.eigh(omega)
    projected = u @ vectors
    lam_root = _qn_columns(projected)
    if np.any(lam_root == 0.0):
        raise ZeroScale("pairwise-difference scale is zero: majority of values tied")
    lam = lam_root**2
    s_u = (vectors * lam) @ vectors.T
    s = d[:, None] * s_u * d[None, :]
    return (s + s.T) / 2.0


_INITIAL_SCATTERS = (
    (1, _hyperbolic_corr),
    (2, _rank_corr),
    (3, _normal_scores_corr),
    (4, _spatial_sign_cov),
    (5, _first_half_cov),
    (6, _orthogonalized_pairwise_cov),
)


def initial_scatters(z: np.ndarray) -> list[tuple[int, np.ndarray]]:
    """The six deterministic initial scatter candidates on standardized data.

    1: correlation of tanh-transformed columns.  2: rank correlation.
    3: correlation of normal scores.  4: spatial-sign covariance.
    5: covariance of the half of rows with smallest norm.  6: pairwise
    scale-identity covariance, orthogonalized.

    A candidate that fails (for instance a zero scale in its construction)
    is skipped with a warning.  Returns (index, matrix) pairs for the
    survivors; raises :class:`DegenerateData` when none survive, and
    :class:`DomainError` for p < 2 (use the exact univariate estimator).
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] < 2:
        raise DomainError("initial scatters require a 2-D matrix with p >= 2")
    survivors: list[tuple[int, np.ndarray]] = []
    for index, builder in _INITIAL_SCATTERS:
        try:
            survivors.append((index, builder(z)))
        except (ZeroScale, DomainError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"initial scatter {index} skipped: {exc}", stacklevel=2)
    if not survivors:
        raise DegenerateData("all six initial scatter candidates failed")
    return survivors


def refine_scatter(z: np.ndarray, scatter: np.ndarray, index: int = 0) -> InitialEstimate:
    """Turn a raw initial scatter into a full location/scatter start.

    Eigenvectors of the candidate define a basis; variances are
    re-estimated there by the squared pairwise-difference scale, and the
    location is the coordinatewise median taken in the sphered basis and
    mapped back.  Raises :class:`ZeroScale` when a projected column has
    zero scale.
    """
    z = np.asarray(z, dtype=np.float64)
    scatter = np.asarray(scatter, dtype=np.float64)
    _, vectors = np.linalg.eigh((scatter + scatter.T) / 2.0)
    projected = z @ vectors
    lam_root = _qn_columns(projected)
    if np.any(lam_root == 0.0):
        raise ZeroScale("pairwise-difference scale is zero: majority of values tied")
    lam = lam_root**2
    refined = (vectors * lam) @ vectors.T
    refined = (refined + refined.T) / 2.0
    root = (vectors * np.sqrt(lam)) @ vectors.T
    inv_root = (vectors / np.sqrt(lam)) @ vectors.T
    center = root @ np.median(z @ inv_root, axis=0)
    return InitialEstimate(index=index, center=center, scatter=refined)


@dataclass(frozen=True)
class _PreparedStart:
    index: int
    sq_dist: np.ndarray
    half: HSubset | None
    half_sq_dist: np.ndarray | None


def _prepare_starts(z: np.ndarray) -> list[_PreparedStart]:
    """Refine every surviving candidate and precompute its h-independent
    pieces: distances from the refined start, and the floor(n/2) screening
    subset with distances from it."""
    n = z.shape[0]
    prepared: list[_PreparedStart] = []
    for index, raw in initial_scatters(z):
        try:
            est = refine_scatter(z, raw, index)
        except ZeroScale as exc:
            warnings.warn(f"initial scatter {index} dropped at refinement: {exc}", stacklevel=2)
            continue
        lower = _try_cholesky(est.scatter)
        if lower is None:
            warnings.warn(f"initial scatter {index} dropped: refined scatter singular", stacklevel=2)
            continue
        d2 = _squared_distances(z, est.center, lower)
        half: HSubset | None = None
        half_d2: np.ndarray | None = None
        h0 = n // 2
        if h0 >= z.shape[1] + 1:
            half = subset_stats(z, select_smallest(d2, h0, tie_values=z))
            half_lower = _try_cholesky(half.cov)
            if half_lower is not None:
                half_d2 = _squared_distances(z, half.mean, half_lower)
            else:
                half = None  # screening half is singular; fall back to raw distances
        prepared.append(_PreparedStart(index, d2, half, half_d2))
    if not prepared:
        raise DegenerateData("no initial scatter candidate survived refinement")
    return prepared


def _concentrate_start(z: np.ndarray, start: _PreparedStart, h: int) -> ConcentrationResult:
    d2 = start.half_sq_dist if start.half_sq_dist is not None else start.sq_dist
    subset = subset_stats(z, select_smallest(d2, h, tie_values=z))
    if not np.isfinite(subset.log_det):
        # More than h rows on a hyperplane: exact fit, nothing to iterate.
        return ConcentrationResult(subset, 0, True, (subset.log_det,))
    return concentrate(z, subset, tie_values=z)


def _finish(
    dm: DataMatrix, std: StandardizedData, prepared: list[_PreparedStart], h: int
) -> LocationScatter:
    n, p = dm.n, dm.p
    best: tuple[float, int, ConcentrationResult] | None = None
    for rank, start in enumerate(prepared):
        result = _concentrate_start(std.z, start, h)
        key = (result.subset.log_det, rank)
        if best is None or key < best[:2]:
            best = (result.subset.log_det, rank, result)
    assert best is not None
    final = best[2].subset

    alpha = h / n
    c0 = consistency_factor_raw(alpha, p)
    exact = not np.isfinite(final.log_det)
    center = std.medians + std.scales * final.mean
    cov = std.scales[:, None] * final.cov * std.scales[None, :]
    log_det = (
        -math.inf
        if exact
        else final.log_det + 2.0 * float(np.sum(np.log(std.scales))) + p * math.log(c0)
    )
    if exact:
        warnings.warn(
            f"exact fit: {final.h} rows lie on a hyperplane; scatter is singular",
            stacklevel=3,
        )
    return LocationScatter.create(
        center,
        cov * c0,
        EstimatorKind.RAW_MCD,
        h,
        alpha,
        consistency_applied=True,
        c0=c0,
        support=final.indices,
        exact_fit=exact,
        log_det=log_det,
    )


def _validate_h(n: int, p: int, h: int) -> None:
    if not p < h <= n:
        raise DomainError(f"need p < h <= n, got h={h}, n={n}, p={p}")
    if 2 * h < n:
        raise DomainError(f"h={h} covers less than half of n={n} rows")


def det_mcd(data: DataMatrix | np.ndarray, h: int | None = None) -> LocationScatter:
    """Deterministic minimum covariance determinant estimate.

    Returns the raw estimate (consistency-scaled covariance of the best
    h-subset) with the subset in ``support``.  Identical inputs give
    bit-identical results; permuting rows changes the result only at
    floating-point noise level.

    Raises :class:`DomainError` for p < 2 or invalid h, :class:`ZeroScale`
    for a constant-majority column, and :class:`DegenerateData` when no
    initial candidate survives.
    """
    dm = as_data_matrix(data)
    if dm.p < 2:
        raise DomainError("deterministic search requires p >= 2; use the univariate estimator")
    h = h if h is not None else default_h(dm.n, dm.p)
    _validate_h(dm.n, dm.p, h)
    std = standardize(dm)
    prepared = _prepare_starts(std.z)
    return _finish(dm, std, prepared, h)


def det_mcd_range(data: DataMatrix | np.ndarray, hs: list[int]) -> list[LocationScatter]:
    """Deterministic estimates for several subset sizes in one pass.

    The six candidate starts are computed once and reused for every h, so
    a coverage sweep costs little more than a single fit.
    """
    dm = as_data_matrix(data)
    if dm.p < 2:
        raise DomainError("deterministic search requires p >= 2; use the univariate estimator")
    for h in hs:
        _validate_h(dm.n, dm.p, h)
    std = standardize(dm)
    prepared = _prepare_starts(std.z)
    return [_finish(dm, std, prepared, h) for h in hs]
