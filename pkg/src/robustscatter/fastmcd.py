"""Randomized search for the minimum covariance determinant h-subset.

Many small random starts are concentrated for a couple of screening steps;
the most promising few are then concentrated to convergence and the best
(smallest determinant) wins.  Randomness is counter-based: start i draws
from a generator keyed by (seed, i), so results are identical regardless of
evaluation order or thread count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    DataMatrix,
    EstimatorKind,
    HSubset,
    LocationScatter,
    _squared_distances,
    _try_cholesky,
    as_data_matrix,
    classical_estimate,
    consistency_factor_raw,
    default_h,
    subset_stats,
)
from .cstep import concentrate, select_smallest
from .errors import DegenerateData, DomainError

__all__ = ["FastMcdConfig", "initial_subset", "fast_mcd"]


@dataclass(frozen=True)
class FastMcdConfig:
    """Tuning knobs for the randomized search.

    Attributes
    ----------
    h : int or None
        Subset size; None means floor((n + p + 1) / 2).
    n_starts : int
        Number of random elemental starts.
    n_keep : int
        How many screened candidates are concentrated to convergence.
    screen_steps : int
        Concentration steps used during screening.
    seed : int
        Base seed for the counter-based start generators.
    partition_threshold : int or None
        When set and n exceeds it, starts are screened inside disjoint row
        partitions before pooling; None disables partitioning.
    n_threads : int
        Worker threads for the start loop; results do not depend on it.
    """

    h: int | None = None
    n_starts: int = 500
    n_keep: int = 10
    screen_steps: int = 2
    seed: int = 0
    partition_threshold: int | None = None
    n_threads: int = 1


def _start_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based: each start's stream is keyed by (seed, index), never by
    # how many draws earlier starts consumed.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def initial_subset(
    data: DataMatrix | np.ndarray, h: int, rng: np.random.Generator
) -> HSubset:
    """One random start: an elemental draw expanded to an h-subset.

    Draws p + 1 distinct rows; while their covariance is singular, adds one
    more uniformly drawn unused row.  The h rows closest to the elemental
    mean/covariance (ties broken by row index) form the returned subset.

    Raises :class:`DegenerateData` when every row has been absorbed and the
    covariance is still singular (all data on a hyperplane).
    """
    dm = as_data_matrix(data)
    n, p = dm.n, dm.p
    if not p < h <= n:
        raise DomainError(f"need p < h <= n, got h={h}, n={n}, p={p}")
    chosen = list(rng.choice(n, size=p + 1, replace=False))
    member = np.zeros(n, dtype=bool)
    member[chosen] = True
    trial = subset_stats(dm, chosen)
    while not np.isfinite(trial.log_det):
        unused = np.flatnonzero(~member)
        if unused.size == 0:
            raise DegenerateData("all rows lie on a hyperplane; no nonsingular subset exists")
        extra = int(unused[rng.integers(unused.size)])
        chosen.append(extra)
        member[extra] = True
        trial = subset_stats(dm, chosen)
    lower = _try_cholesky(trial.cov)
    d2 = _squared_distances(dm.values, trial.mean, lower)
    return subset_stats(dm, select_smallest(d2, h))


def _screen_one(
    dm: DataMatrix, h: int, config: FastMcdConfig, index: int
) -> HSubset:
    rng = _start_rng(config.seed, index)
    start = initial_subset(dm, h, rng)
    if not np.isfinite(start.log_det):
        return start
    return concentrate(dm, start, max_steps=config.screen_steps).subset


def _partition_rows(n: int, max_size: int = 300) -> list[np.ndarray]:
    groups = math.ceil(n / max_size)
    return [np.arange(g, n, groups) for g in range(groups)]


def _screen_partitioned(dm: DataMatrix, h: int, config: FastMcdConfig) -> list[HSubset]:
    """Screen starts inside disjoint row partitions, then re-screen the
    pooled survivors on the full data.  A speed heuristic for large n."""
    parts = _partition_rows(dm.n)
    if any(part.size <= dm.p + 1 for part in parts):
        return [_screen_one(dm, h, config, i) for i in range(config.n_starts)]
    pooled: list[tuple[int, HSubset]] = []
    for g, part in enumerate(parts):
        sub = DataMatrix(dm.values[part])
        h_g = max(dm.p + 1, (h * part.size) // dm.n)
        local: list[tuple[float, int, HSubset]] = []
        for i in range(g, config.n_starts, len(parts)):
            rng = _start_rng(config.seed, i)
            start = initial_subset(sub, h_g, rng)
            if np.isfinite(start.log_det):
                start = concentrate(sub, start, max_steps=config.screen_steps).subset
            local.append((start.log_det, i, start))
        local.sort(key=lambda t: (t[0], t[1]))
        pooled.extend((i, s) for _, i, s in local[: config.n_keep])
    # Project each pooled candidate onto the full data and re-screen there.
    screened: list[HSubset] = []
    for _, cand in sorted(pooled, key=lambda t: t[0]):
        lower = _try_cholesky(cand.cov)
        if lower is None:
            # Singular partition candidate: keep the h globally closest rows
            # to its mean so the exact-fit direction still competes.
            d2 = np.einsum("ij,ij->i", dm.values - cand.mean, dm.values - cand.mean)
        else:
            d2 = _squared_distances(dm.values, cand.mean, lower)
        full = subset_stats(dm, select_smallest(d2, h))
        if np.isfinite(full.log_det):
            full = concentrate(dm, full, max_steps=config.screen_steps).subset
        screened.append(full)
    return screened


def fast_mcd(
    data: DataMatrix | np.ndarray, config: FastMcdConfig | None = None
) -> LocationScatter:
    """Randomized minimum covariance determinant estimate.

    Returns the raw estimate: mean and consistency-scaled covariance of the
    best h-subset found, with the subset recorded in ``support``.  With
    h = n the search short-circuits to the classical estimate (factor 1).
    A singular best subset is an exact fit: more than h rows on a
    hyperplane.  It is returned with ``exact_fit`` set, a singular scatter
    and ``log_det = -inf``.

    Raises :class:`DomainError` for invalid configuration and
    :class:`DegenerateData` when all data lies on a hyperplane.  Warns when
    n <= 5p, where random elemental starts are unreliable.
    """
    dm = as_data_matrix(data)
    n, p = dm.n, dm.p
    config = config or FastMcdConfig()
    h = config.h if config.h is not None else default_h(n, p)
    if not p < h <= n:
        raise DomainError(f"need p < h <= n, got h={h}, n={n}, p={p}")
    if 2 * h < n:
        raise DomainError(f"h={h} covers less than half of n={n} rows")
    if config.n_keep < 1 or config.n_keep > config.n_starts:
        raise DomainError(f"need 1 <= n_keep <= n_starts, got {config.n_keep}, {config.n_starts}")
    if config.screen_steps < 1:
        raise DomainError(f"screen_steps must be >= 1, got {config.screen_steps}")
    if n <= 5 * p:
        warnings.warn(
            f"n={n} is small relative to p={p} (n <= 5p); random starts are unreliable",
            stacklevel=2,
        )
    if h == n:
        cls = classical_estimate(dm)
        return LocationScatter.create(
            cls.center,
            cls.scatter,
            EstimatorKind.RAW_MCD,
            n,
            1.0,
            consistency_applied=True,
            c0=1.0,
            support=np.arange(n),
            log_det=cls.log_det,
        )

    partitioned = config.partition_threshold is not None and n > config.partition_threshold
    if partitioned:
        screened = _screen_partitioned(dm, h, config)
    elif config.n_threads > 1:
        with ThreadPoolExecutor(max_workers=config.n_threads) as pool:
            screened = list(
                pool.map(lambda i: _screen_one(dm, h, config, i), range(config.n_starts))
            )
    else:
        screened = [_screen_one(dm, h, config, i) for i in range(config.n_starts)]

    ranked = sorted(range(len(screened)), key=lambda i: (screened[i].log_det, i))
    best: tuple[float, int, HSubset] | None = None
    for i in ranked[: config.n_keep]:
        cand = screened[i]
        if np.isfinite(cand.log_det):
            cand = concentrate(dm, cand).subset
        key = (cand.log_det, i)
        if best is None or key < (best[0], best[1]):
            best = (cand.log_det, i, cand)
    assert best is not None
    final = best[2]

    alpha = h / n
    exact = not np.isfinite(final.log_det)
    c0 = consistency_factor_raw(alpha, p)
    scatter = final.cov * c0
    log_det = -math.inf if exact else final.log_det + p * math.log(c0)
    if exact:
        warnings.warn(
            f"exact fit: {final.h} rows lie on a hyperplane; scatter is singular",
            stacklevel=2,
        )
    return LocationScatter.create(
        final.mean,
        scatter,
        EstimatorKind.RAW_MCD,
        h,
        alpha,
        consistency_applied=True,
        c0=c0,
        support=final.indices,
        exact_fit=exact,
        log_det=log_det,
    )
