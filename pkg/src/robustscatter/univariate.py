"""Exact univariate minimum covariance determinant estimation.

In one dimension the optimal h-subset is always a contiguous window of the
sorted sample, so the global optimum is found exactly by sweeping the
n - h + 1 windows in O(n log n) total.  A brute-force enumerator over all
C(n, h) subsets backs the sweep in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import _consistency_scaling
from .errors import DomainError, InstanceTooLarge

__all__ = ["UniMcdResult", "uni_mcd", "uni_mcd_bruteforce", "lts_location"]


@dataclass(frozen=True)
class UniMcdResult:
    """Univariate robust location/scale estimate.

    ``scale`` is the window standard deviation times the square root of the
    Gaussian consistency factor for coverage h/n.  ``subset_start`` is the
    offset of the winning window in the sorted sample.  A zero-variance
    window yields ``scale = 0`` with ``exact_fit`` set.
    """

    location: float
    scale: float
    subset_start: int
    h: int
    n: int
    raw_variance: float
    exact_fit: bool

    @property
    def alpha(self) -> float:
        return self.h / self.n


def _check_input(x: np.ndarray, h: int | None) -> tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise DomainError(f"need at least 2 values, got {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError("input contains non-finite values")
    if h is None:
        h = (n + 2) // 2
    if not 2 <= h <= n:
        raise DomainError(f"need 2 <= h <= n, got h={h}, n={n}")
    return x, h


def _best_window(sorted_x: np.ndarray, h: int) -> int:
    """Start index of the minimum-variance length-h window (first on ties).

    Window sums run on median-shifted values, which keeps the cumulative
    sums small for data with a large common offset.
    """
    centered = sorted_x - np.median(sorted_x)
    c1 = np.concatenate(([0.0], np.cumsum(centered)))
    c2 = np.concatenate(([0.0], np.cumsum(centered * centered)))
    s1 = c1[h:] - c1[:-h]
    s2 = c2[h:] - c2[:-h]
    variances = np.maximum(s2 - s1 * s1 / h, 0.0)
    return int(np.argmin(variances))


def uni_mcd(x: np.ndarray, h: int | None = None) -> UniMcdResult:
    """Exact univariate minimum covariance determinant estimate.

    Sorts the sample, finds the length-h window with smallest variance
    (first such window on ties), and reports its mean and its
    consistency-scaled standard deviation.  ``h`` defaults to
    floor(n / 2) + 1.

    Raises :class:`DomainError` for n < 2, h outside [2, n], or non-finite
    input.
    """
    x, h = _check_input(x, h)
    sorted_x = np.sort(x)
    start = _best_window(sorted_x, h)
    window = sorted_x[start : start + h]
    location = float(window.mean())
    variance = float(window.var(ddof=1))
    factor = _consistency_scaling(h / x.size, 1)
    return UniMcdResult(
        location=location,
        scale=math.sqrt(variance * factor),
        subset_start=start,
        h=h,
        n=x.size,
        raw_variance=variance,
        exact_fit=variance == 0.0,
    )


def lts_location(x: np.ndarray, h: int | None = None) -> float:
    """Mean of the minimum-variance length-h sorted window.

    Minimizing the window variance and minimizing the sum of squared
    residuals about the window mean select the same window, so this equals
    ``uni_mcd(x, h).location``.
    """
    x, h = _check_input(x, h)
    sorted_x = np.sort(x)
    start = _best_window(sorted_x, h)
    return float(sorted_x[start : start + h].mean())


def uni_mcd_bruteforce(x: np.ndarray, h: int | None = None) -> UniMcdResult:
    """Exhaustive check of the sweep: minimize variance over all C(n, h) subsets.

    Enumerates every subset in lexicographic order over the sorted sample
    (first minimizer wins ties) and independently scans the contiguous
    windows for ``subset_start``.  Limited to n <= 20; larger inputs raise
    :class:`InstanceTooLarge`.
    """
    x, h = _check_input(x, h)
    n = x.size
    if n > 20:
        raise InstanceTooLarge(f"exhaustive enumeration is limited to n <= 20, got {n}")
    sorted_x = np.sort(x)
    best_var = math.inf
    best_combo: tuple[int, ...] | None = None
    for combo in combinations(range(n), h):
        var = float(sorted_x[list(combo)].var(ddof=1))
        if var < best_var:
            best_var = var
            best_combo = combo
    assert best_combo is not None
    window_vars = [float(sorted_x[s : s + h].var(ddof=1)) for s in range(n - h + 1)]
    start = int(np.argmin(window_vars))
    location = float(sorted_x[list(best_combo)].mean())
    factor = _consistency_scaling(h / n, 1)
    return UniMcdResult(
        location=location,
        scale=math.sqrt(best_var * factor),
        subset_start=start,
        h=h,
        n=n,
        raw_variance=best_var,
        exact_fit=best_var == 0.0,
    )
