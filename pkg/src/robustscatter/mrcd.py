"""Regularized minimum covariance determinant estimation.

Blends each h-subset's covariance with a well-conditioned target matrix,
rho*T + (1-rho)*Cov, and minimizes the determinant of the blend.  Because
the blend is positive definite whenever T is, the estimator exists for any
n and p, including n < p where every plain h-subset covariance is singular.
The modified concentration step (select the h rows closest in the blended
metric) never increases the blended determinant, mirroring the plain case.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DataMatrix,
    EstimatorKind,
    HSubset,
    LocationScatter,
    _consistency_scaling,
    _squared_distances,
    _try_cholesky,
    as_data_matrix,
    sample_covariance,
    spd_log_det,
    subset_stats,
)
from .cstep import select_smallest
from .detmcd import (
    _hyperbolic_corr,
    _normal_scores_corr,
    _qn_allow_zero,
    _rank_corr,
    qn_scale,
    refine_scatter,
)
from .errors import DomainError, SingularMatrix, ZeroScale

__all__ = ["TargetKind", "MrcdConfig", "MrcdResult", "target_matrix", "regularized_cov", "mrcd"]

_RHO_GRID = np.round(np.arange(0.01, 1.005, 0.01), 2)
_BLEND = 0.25  # fixed blend used only to rank rows inside start construction


class TargetKind(str, Enum):
    """Shape of the regularization target."""

    IDENTITY = "identity"
    EQUICORRELATION = "equicorr"


@dataclass(frozen=True)
class MrcdConfig:
    """Configuration for the regularized estimator.

    Attributes
    ----------
    h : int or None
        Subset size, 2 <= h <= n; None means floor(0.75 n).  h <= p is
        allowed: regularization keeps the blend invertible.
    rho : float or None
        Blend weight in (0, 1]; None selects the smallest grid value
        {0.01, ..., 1.00} whose blend at the initial subset has condition
        number at most ``max_condition``.
    target : TargetKind or str
        Identity, or equicorrelation with the correlation estimated from
        the data.
    max_condition : float
        Condition-number ceiling used by automatic rho selection.
    """

    h: int | None = None
    rho: float | None = None
    target: TargetKind | str = TargetKind.IDENTITY
    max_condition: float = 1000.0


@dataclass(frozen=True)
class MrcdResult:
    """Regularized location/scatter estimate.

    ``scatter`` is rho*T + c0*(1-rho)*Cov(best subset): the consistency
    factor applies to the covariance part only, so with rho = 1 the scatter
    equals the target exactly.  ``step_log_dets`` records the blended
    log-determinant trace of every start's concentration, each trace
    nonincreasing.
    """

    location: np.ndarray
    scatter: np.ndarray
    subset: HSubset
    rho: float
    target: np.ndarray
    c0: float
    log_det: float
    alpha: float
    step_log_dets: tuple[tuple[float, ...], ...]

    def to_location_scatter(self) -> LocationScatter:
        return LocationScatter.create(
            self.location,
            self.scatter,
            EstimatorKind.MRCD,
            self.subset.h,
            self.alpha,
            consistency_applied=True,
            c0=self.c0,
            support=self.subset.indices,
            log_det=self.log_det,
        )


def target_matrix(data: DataMatrix | np.ndarray, kind: TargetKind | str) -> np.ndarray:
    """Regularization target: identity, or an equicorrelation matrix.

    The equicorrelation value is the median over column pairs of the
    pairwise scale-identity correlation computed on robustly standardized
    columns, clamped so the target stays positive definite.  Raises
    :class:`ZeroScale` when a column has zero robust scale.
    """
    dm = as_data_matrix(data)
    kind = TargetKind(kind)
    p = dm.p
    if kind is TargetKind.IDENTITY:
        return np.eye(p)
    if p < 2:
        return np.eye(p)
    scales = np.empty(p)
    for j in range(p):
        try:
            scales[j] = qn_scale(dm.values[:, j])
        except ZeroScale as exc:
            raise ZeroScale(f"column {j} has zero robust scale") from exc
    u = dm.values / scales
    corrs = []
    for j in range(p):
        for i in range(j):
            plus = _qn_allow_zero(u[:, i] + u[:, j]) ** 2
            minus = _qn_allow_zero(u[:, i] - u[:, j]) ** 2
            denom = plus + minus
            corrs.append(0.0 if denom == 0.0 else (plus - minus) / denom)
    r = float(np.median(corrs))
    # Positive definiteness of (1-r)I + rJ requires r > -1/(p-1).
    lo = max(-0.99, -0.99 / (p - 1))
    r = min(0.99, max(lo, r))
    return (1.0 - r) * np.eye(p) + r * np.ones((p, p))


def regularized_cov(subset: HSubset, target: np.ndarray, rho: float) -> np.ndarray:
    """The blend rho*target + (1-rho)*subset covariance."""
    rho = _check_rho(rho)
    target = np.asarray(target, dtype=np.float64)
    if target.shape != subset.cov.shape:
        raise DomainError(f"target shape {target.shape} does not match covariance {subset.cov.shape}")
    return rho * target + (1.0 - rho) * subset.cov


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    return rho


def _tolerant_scales(values: np.ndarray) -> np.ndarray:
    # Start ranking only: a constant column gets unit scale instead of an
    # error, so degenerate columns cannot block the fit.
    p = values.shape[1]
    scales = np.ones(p)
    for j in range(p):
        try:
            scales[j] = qn_scale(values[:, j])
        except (ZeroScale, DomainError):
            scales[j] = 1.0
    return scales


def _blend_with_identity(matrix: np.ndarray) -> np.ndarray:
    p = matrix.shape[0]
    scale = float(np.trace(matrix)) / p
    if scale <= 0.0 or not np.isfinite(scale):
        return np.eye(p)
    return _BLEND * scale * np.eye(p) + (1.0 - _BLEND) * matrix


def _rank_start(z: np.ndarray, center: np.ndarray, metric: np.ndarray, h: int) -> np.ndarray | None:
    lower = _try_cholesky(_blend_with_identity(metric))
    if lower is None:
        return None
    d2 = _squared_distances(z, center, lower)
    return np.sort(select_smallest(d2, h, tie_values=z))


_CORRELATION_BUILDERS = ((1, _hyperbolic_corr), (2, _rank_corr), (3, _normal_scores_corr))


def _start_pool(z: np.ndarray, h: int) -> list[np.ndarray]:
    """Candidate h-subsets: correlation-based refined starts (only well
    defined when n > p), a spatial-sign start, a smallest-norm-half start,
    and the plain smallest-norm fallback (always present, listed last)."""
    n, p = z.shape
    starts: list[np.ndarray] = []
    if n > p >= 2:
        for index, builder in _CORRELATION_BUILDERS:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    est = refine_scatter(z, builder(z), index)
            except (ZeroScale, DomainError):
                continue
            start = _rank_start(z, est.center, est.scatter, h)
            if start is not None:
                starts.append(start)
    norms2 = np.einsum("ij,ij->i", z, z)
    sign_start = _rank_start(z, np.zeros(p), _spatial_sign_outer(z), h)
    if sign_start is not None:
        starts.append(sign_start)
    half = select_smallest(np.sqrt(norms2), (n + 1) // 2, tie_values=z)
    if half.size >= 2:
        rows = z[half]
        bacon_start = _rank_start(z, rows.mean(axis=0), sample_covariance(rows), h)
        if bacon_start is not None:
            starts.append(bacon_start)
    starts.append(np.sort(select_smallest(norms2, h, tie_values=z)))
    unique: list[np.ndarray] = []
    for start in starts:
        if not any(np.array_equal(start, seen) for seen in unique):
            unique.append(start)
    return unique


def _spatial_sign_outer(z: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    k = np.divide(z, norms[:, None], out=np.zeros_like(z), where=norms[:, None] > 0.0)
    s = k.T @ k / z.shape[0]
    return (s + s.T) / 2.0


def _auto_rho(
    values: np.ndarray, fallback: np.ndarray, target: np.ndarray, max_condition: float
) -> float:
    """Smallest grid rho whose blend at the fallback subset has condition
    number at most ``max_condition``."""
    cov = sample_covariance(values[fallback])
    identity = np.allclose(target, np.eye(target.shape[0]))
    if identity:
        evals = np.linalg.eigvalsh((cov + cov.T) / 2.0)
        for rho in _RHO_GRID:
            blended = rho + (1.0 - rho) * evals
            if blended[-1] <= max_condition * blended[0]:
                return float(rho)
    else:
        for rho in _RHO_GRID:
            evals = np.linalg.eigvalsh(rho * target + (1.0 - rho) * cov)
            if evals[0] > 0.0 and evals[-1] <= max_condition * evals[0]:
                return float(rho)
    warnings.warn(
        f"no blend weight reaches condition number {max_condition}; using rho=1", stacklevel=3
    )
    return 1.0


def _reg_stats(
    values: np.ndarray, indices: np.ndarray, target: np.ndarray, rho: float
) -> tuple[np.ndarray, np.ndarray]:
    rows = values[indices]
    mean = rows.mean(axis=0)
    reg = rho * target + (1.0 - rho) * sample_covariance(rows)
    return mean, (reg + reg.T) / 2.0


def _concentrate_regularized(
    values: np.ndarray,
    start: np.ndarray,
    target: np.ndarray,
    rho: float,
    max_steps: int = 200,
) -> tuple[np.ndarray, tuple[float, ...], bool]:
    current = np.sort(np.asarray(start, dtype=np.intp))
    h = current.size
    trace: list[float] = []
    for _ in range(max_steps):
        mean, reg = _reg_stats(values, current, target, rho)
        trace.append(spd_log_det(reg))
        lower = _try_cholesky(reg)
        if lower is None:
            raise SingularMatrix("regularized covariance lost positive definiteness")
        d2 = _squared_distances(values, mean, lower)
        nxt = np.sort(select_smallest(d2, h, tie_values=values))
        if np.array_equal(nxt, current):
            return current, tuple(trace), True
        current = nxt
    mean, reg = _reg_stats(values, current, target, rho)
    trace.append(spd_log_det(reg))
    return current, tuple(trace), False


def mrcd(data: DataMatrix | np.ndarray, config: MrcdConfig | None = None) -> MrcdResult:
    """Regularized minimum covariance determinant estimate.

    Works for any n >= 2 and p >= 1, including p > n.  The returned scatter
    is rho*T + c0*(1-rho)*Cov(H*) for the winning subset H*, positive
    definite by construction with smallest eigenvalue at least rho times
    the target's.

    Raises :class:`DomainError` for invalid h or rho, :class:`ZeroScale`
    from equicorrelation targets on degenerate columns, and
    :class:`DegenerateData` for an empty matrix (guarded at construction).
    """
    dm = as_data_matrix(data)
    n, p = dm.n, dm.p
    config = config or MrcdConfig()
    h = config.h if config.h is not None else max(2, (3 * n) // 4)
    if not 2 <= h <= n:
        raise DomainError(f"need 2 <= h <= n, got h={h}, n={n}")
    target = target_matrix(dm, config.target)

    # Standardize for start ranking only; estimation runs on the original scale.
    medians = np.median(dm.values, axis=0)
    scales = _tolerant_scales(dm.values)
    z = (dm.values - medians) / scales

    norms2 = np.einsum("ij,ij->i", z, z)
    fallback = np.sort(select_smallest(norms2, h, tie_values=z))
    rho = _check_rho(config.rho) if config.rho is not None else _auto_rho(
        dm.values, fallback, target, config.max_condition
    )

    if rho == 1.0:
        # The blend no longer depends on the subset; every subset ties, so
        # the smallest-norm subset is reported with scatter equal to the target.
        subset = subset_stats(dm, fallback)
        mean = subset.mean
        scatter = target.copy()
        return MrcdResult(
            location=mean,
            scatter=scatter,
            subset=subset,
            rho=1.0,
            target=target,
            c0=1.0,
            log_det=spd_log_det(scatter),
            alpha=h / n,
            step_log_dets=((spd_log_det(scatter),),),
        )

    best: tuple[float, int, np.ndarray] | None = None
    traces: list[tuple[float, ...]] = []
    for order, start in enumerate(_start_pool(z, h)):
        final, trace, _converged = _concentrate_regularized(dm.values, start, target, rho)
        traces.append(trace)
        key = (trace[-1], order)
        if best is None or key < (best[0], best[1]):
            best = (trace[-1], order, final)
    assert best is not None

    subset = subset_stats(dm, best[2])
    c0 = _consistency_scaling(h / n, p)
    scatter = rho * target + c0 * (1.0 - rho) * subset.cov
    scatter = (scatter + scatter.T) / 2.0
    return MrcdResult(
        location=subset.mean,
        scatter=scatter,
        subset=subset,
        rho=rho,
        target=target,
        c0=c0,
        log_det=spd_log_det(scatter),
        alpha=h / n,
        step_log_dets=tuple(traces),
    )
