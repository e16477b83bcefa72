"""Concentration steps: the engine shared by all subset-based estimators.

A concentration step maps an h-subset to the h rows with smallest
statistical distance from that subset's mean and covariance.  The subset
covariance determinant never increases along such steps, so iterating them
converges to a local optimum in finitely many steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataMatrix, HSubset, _squared_distances, _try_cholesky, as_data_matrix, subset_stats
from .errors import SingularSubset

__all__ = ["ConcentrationResult", "c_step", "concentrate", "select_smallest"]


@dataclass(frozen=True)
class ConcentrationResult:
    """Outcome of iterating concentration steps from one start.

    Attributes
    ----------
    subset : HSubset
        The final h-subset.
    n_steps : int
        Number of concentration steps taken (a start that is already a
        fixed point takes exactly 1 step to discover that).
    converged : bool
        True when the subset stopped changing, or a singular subset was
        reached (an exact fit, which is a global optimum).
    log_dets : tuple of float
        Log-determinant after each step; nonincreasing.
    """

    subset: HSubset
    n_steps: int
    converged: bool
    log_dets: tuple[float, ...] = ()


def select_smallest(
    values: np.ndarray, k: int, tie_values: np.ndarray | None = None
) -> np.ndarray:
    """Indices of the k smallest entries of ``values``.

    Ties are broken by row index when ``tie_values`` is None; otherwise by
    lexicographic comparison of the corresponding ``tie_values`` rows first,
    then by row index.  The deterministic tie rule makes every caller
    reproducible, and the lexicographic variant makes selections invariant
    under row permutation.
    """
    values = np.asarray(values)
    if tie_values is None:
        order = np.argsort(values, kind="stable")
    else:
        # np.lexsort: last key is primary; earlier keys break ties in order,
        # and its stability leaves equal full keys in index order.
        cols = [np.asarray(tie_values[:, j]) for j in range(tie_values.shape[1] - 1, -1, -1)]
        order = np.lexsort((*cols, values))
    return order[:k]


def c_step(
    data: DataMatrix | np.ndarray,
    current: HSubset,
    tie_values: np.ndarray | None = None,
) -> HSubset:
    """One concentration step from ``current``.

    Computes every row's squared statistical distance from the current
    subset's mean and covariance and returns the subset of the h closest
    rows.  Raises :class:`SingularSubset` when ``current`` has a singular
    covariance (no distances exist there; the caller already holds an
    exact fit).
    """
    dm = as_data_matrix(data)
    lower = _try_cholesky(current.cov)
    if lower is None:
        raise SingularSubset(
            "current subset covariance is singular; concentration cannot proceed"
        )
    d2 = _squared_distances(dm.values, current.mean, lower)
    keep = select_smallest(d2, current.h, tie_values)
    return subset_stats(dm, keep)


def concentrate(
    data: DataMatrix | np.ndarray,
    start: HSubset,
    max_steps: int = 200,
    tie_values: np.ndarray | None = None,
) -> ConcentrationResult:
    """Iterate concentration steps from ``start`` until the subset repeats.

    Convergence is detected by index-set equality.  A singular intermediate
    subset terminates iteration immediately and is returned as converged:
    its determinant is zero, which no subset can beat.  Stops unconverged
    after ``max_steps`` steps.

    Raises :class:`SingularSubset` when ``start`` itself is singular.
    """
    dm = as_data_matrix(data)
    if not np.isfinite(start.log_det):
        raise SingularSubset("start subset covariance is singular")
    current = start
    trace: list[float] = []
    for step in range(1, max_steps + 1):
        nxt = c_step(dm, current, tie_values)
        trace.append(nxt.log_det)
        if not np.isfinite(nxt.log_det):
            return ConcentrationResult(nxt, step, True, tuple(trace))
        if nxt.h == current.h and np.array_equal(nxt.indices, current.indices):
            return ConcentrationResult(nxt, step, True, tuple(trace))
        current = nxt
    return ConcentrationResult(current, max_steps, False, tuple(trace))
