"""Benchmark suites: efficiency, breakdown and equivariance diagnostics.

Each suite runs a seeded Monte Carlo experiment and returns a small report
of named scalar results.  The CLI renders these as a delimited table; the
acceptance tests pin the expected ranges.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .core import as_data_matrix, h_from_alpha, sample_covariance
from .detmcd import det_mcd
from .errors import InstanceTooLarge
from .fastmcd import FastMcdConfig, fast_mcd
from .reweight import reweight

__all__ = [
    "BenchRow",
    "BenchReport",
    "bench_efficiency",
    "bench_breakdown",
    "bench_equivariance",
]

# Largest n * reps a Monte Carlo suite will accept.
_MAX_CELLS = 10_000_000


@dataclass(frozen=True)
class BenchRow:
    """One named benchmark result, with a standard error where meaningful."""

    name: str
    value: float
    stderr: float | None = None


@dataclass(frozen=True)
class BenchReport:
    """A benchmark suite's results plus its wall-clock runtime."""

    suite: str
    rows: tuple[BenchRow, ...]
    seconds: float


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, trial)))


def _derived_seed(seed: int, part: int, trial: int) -> int:
    # An integer seed decoupled from the trial's data stream.
    return int(np.random.SeedSequence((seed, part, trial)).generate_state(1)[0])


def _check_budget(n: int, reps: int) -> None:
    if n * reps > _MAX_CELLS:
        raise InstanceTooLarge(
            f"n * reps = {n * reps} exceeds the Monte Carlo budget of {_MAX_CELLS}"
        )


def bench_efficiency(
    n: int = 1000, p: int = 2, alpha: float = 0.5, reps: int = 500, seed: int = 0
) -> BenchReport:
    """Finite-sample efficiency of the raw and reweighted estimates.

    Draws standard normal data, fits the deterministic estimator at
    coverage ``alpha``, and reports the ratio of the sample covariance
    diagonal's Monte Carlo variance to each robust diagonal's Monte Carlo
    variance (so 1.0 means fully efficient).  Standard errors come from a
    ten-way batch split.
    """
    _check_budget(n, reps)
    start = time.perf_counter()
    h = h_from_alpha(n, p, alpha)
    classical = np.empty((reps, p))
    raw_diag = np.empty((reps, p))
    weighted_diag = np.empty((reps, p))
    for rep in range(reps):
        x = _trial_rng(seed, rep).standard_normal((n, p))
        classical[rep] = np.diagonal(sample_covariance(x))
        raw = det_mcd(x, h)
        raw_diag[rep] = np.diagonal(raw.scatter)
        weighted_diag[rep] = np.diagonal(reweight(x, raw).scatter)

    def _ratio(block_classical: np.ndarray, block_robust: np.ndarray) -> float:
        return float(np.mean(block_classical.var(axis=0) / block_robust.var(axis=0)))

    # Each interleaved batch needs at least two replications for its
    # variance ratio to be defined.
    n_batches = min(10, reps // 2)
    rows = []
    for name, robust in (("raw", raw_diag), ("weighted", weighted_diag)):
        value = _ratio(classical, robust)
        stderr = None
        if n_batches >= 2:
            batches = [
                _ratio(classical[b::n_batches], robust[b::n_batches])
                for b in range(n_batches)
            ]
            stderr = float(np.std(batches, ddof=1) / np.sqrt(len(batches)))
        rows.append(BenchRow(f"{name}_diag_efficiency", value, stderr))
    return BenchReport("efficiency", tuple(rows), time.perf_counter() - start)


def _inflated_hull(points: np.ndarray, factor: float = 2.0) -> Delaunay:
    centroid = points.mean(axis=0)
    return Delaunay(centroid + factor * (points - centroid))


def bench_breakdown(
    n: int = 40,
    p: int = 2,
    h: int = 21,
    trials: int = 200,
    offset: float = 1e6,
    seed: int = 0,
    n_starts: int = 100,
) -> BenchReport:
    """Breakdown stress test at the estimator's contamination limit.

    With h = 21 of n = 40 the fit tolerates 19 arbitrarily bad rows.  Part
    one replaces 19 rows with scattered distant contamination and reports
    the fraction of trials whose center stays inside the clean rows' hull
    inflated twofold about its centroid.  Part two replaces 20 rows
    (a majority of every h-subset) with one tight distant cluster and
    reports the fraction of trials whose center lands farther than 1e3
    from the origin, demonstrating the cliff just past the limit.
    """
    _check_budget(n, trials * 2)
    start = time.perf_counter()
    inside = 0
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        x = rng.standard_normal((n, p))
        m = h - 2
        directions = rng.standard_normal((m, p))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        x[n - m :] = offset * directions
        config = FastMcdConfig(h=h, n_starts=n_starts, seed=_derived_seed(seed, 1, trial))
        estimate = fast_mcd(x, config)
        hull = _inflated_hull(x[: n - m])
        if hull.find_simplex(estimate.center) >= 0:
            inside += 1
    far = 0
    for trial in range(trials):
        rng = _trial_rng(seed + 1, trial)
        x = rng.standard_normal((n, p))
        m = h - 1
        cluster_dir = rng.standard_normal(p)
        cluster_dir /= np.linalg.norm(cluster_dir)
        x[n - m :] = offset * cluster_dir + 1e-3 * rng.standard_normal((m, p))
        config = FastMcdConfig(h=h, n_starts=n_starts, seed=_derived_seed(seed, 2, trial))
        with warnings.catch_warnings():
            # The planted cluster is designed to capture the subset, which
            # routinely trips the exact-fit warning.
            warnings.simplefilter("ignore")
            estimate = fast_mcd(x, config)
        if float(np.linalg.norm(estimate.center)) > 1e3:
            far += 1
    rows = (
        BenchRow("below_limit_center_inside_hull", inside / trials),
        BenchRow("past_limit_center_broken", far / trials),
    )
    return BenchReport("breakdown", rows, time.perf_counter() - start)


def bench_equivariance(
    trials: int = 50, n: int = 120, p: int = 3, seed: int = 0
) -> BenchReport:
    """How far the deterministic estimator is from exact affine equivariance.

    Columnwise standardization makes the deterministic estimator only
    approximately equivariant under non-diagonal maps; this reports the
    maximum relative deviation of transformed center and scatter over random
    invertible maps.  Purely diagnostic: there is no pinned bound.
    """
    _check_budget(n, trials)
    start = time.perf_counter()
    worst_center = 0.0
    worst_scatter = 0.0
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        x = rng.standard_normal((n, p))
        x[: n // 10] += 6.0  # a few shifted rows so the fit is not trivial
        amat = rng.standard_normal((p, p)) + 0.5 * np.eye(p)
        shift = rng.standard_normal(p)
        base = det_mcd(x)
        mapped = det_mcd(x @ amat.T + shift)
        want_center = amat @ base.center + shift
        want_scatter = amat @ base.scatter @ amat.T
        denom_c = max(float(np.max(np.abs(want_center))), 1e-12)
        denom_s = max(float(np.max(np.abs(want_scatter))), 1e-12)
        worst_center = max(worst_center, float(np.max(np.abs(mapped.center - want_center))) / denom_c)
        worst_scatter = max(worst_scatter, float(np.max(np.abs(mapped.scatter - want_scatter))) / denom_s)
    rows = (
        BenchRow("max_center_relative_deviation", worst_center),
        BenchRow("max_scatter_relative_deviation", worst_scatter),
    )
    return BenchReport("equivariance", rows, time.perf_counter() - start)
