"""Diagnostic figures rendered straight to files, no GUI backend involved.

Each builder returns a matplotlib Figure; :func:`save_figure` writes it.
The CLI uses these to drop a PNG next to its delimited output when asked.
"""

from __future__ import annotations

import math
import os

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .core import DataMatrix, LocationScatter, _try_cholesky, as_data_matrix, chi2_quantile
from .errors import DomainError, SingularMatrix
from .reweight import DdPlotData

__all__ = ["dd_figure", "ellipse_figure", "distance_figure", "save_figure"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def dd_figure(dd: DdPlotData) -> Figure:
    """Distance-distance plot: classical versus robust distance per row.

    The diagonal marks agreement; horizontal and vertical lines mark the
    cutoff.  Points in the upper-left block are outliers only the robust
    estimate sees.
    """
    fig = Figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(111)
    ax.scatter(dd.md, dd.rd, s=18, color=_COLORS[0], alpha=0.8, edgecolors="none")
    top = max(float(np.max(dd.md)), float(np.max(dd.rd)), dd.cutoff) * 1.05
    ax.plot([0, top], [0, top], color="0.4", lw=0.8, ls="--")
    ax.axhline(dd.cutoff, color=_COLORS[1], lw=0.8)
    ax.axvline(dd.cutoff, color=_COLORS[1], lw=0.8)
    ax.set_xlabel("classical Mahalanobis distance")
    ax.set_ylabel("robust distance")
    ax.set_xlim(0, top)
    ax.set_ylim(0, top)
    ax.set_title("distance-distance diagnostic")
    fig.tight_layout()
    return fig


def _ellipse_path(estimate: LocationScatter, radius: float, points: int = 256) -> np.ndarray:
    lower = _try_cholesky(estimate.scatter)
    if lower is None:
        raise SingularMatrix("cannot draw a tolerance ellipse for a singular scatter")
    theta = np.linspace(0.0, 2.0 * math.pi, points)
    circle = np.vstack((np.cos(theta), np.sin(theta)))
    return estimate.center[:, None] + radius * (lower @ circle)


def ellipse_figure(
    data: DataMatrix | np.ndarray,
    estimates: list[tuple[str, LocationScatter]],
    cutoff_prob: float = 0.975,
) -> Figure:
    """Bivariate scatter with one tolerance ellipse per labeled estimate.

    Only defined for p = 2.  Each ellipse is the set of points at the
    ``cutoff_prob`` chi-square distance from its estimate.
    """
    dm = as_data_matrix(data)
    if dm.p != 2:
        raise DomainError(f"tolerance ellipses are only drawn for p = 2, got p = {dm.p}")
    radius = math.sqrt(chi2_quantile(cutoff_prob, 2))
    fig = Figure(figsize=(6.5, 6.0))
    ax = fig.add_subplot(111)
    ax.scatter(dm.values[:, 0], dm.values[:, 1], s=18, color="0.25", alpha=0.8, edgecolors="none")
    for i, (label, est) in enumerate(estimates):
        path = _ellipse_path(est, radius)
        ax.plot(path[0], path[1], color=_COLORS[(i + 1) % len(_COLORS)], lw=1.4, label=label)
    names = dm.column_names or ("x0", "x1")
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    if estimates:
        ax.legend(frameon=False)
    ax.set_title(f"{cutoff_prob:g} tolerance ellipses")
    fig.tight_layout()
    return fig


def distance_figure(rd: np.ndarray, cutoff: float) -> Figure:
    """Robust distance of each row by index, with the cutoff line."""
    rd = np.asarray(rd, dtype=np.float64)
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(111)
    ax.scatter(np.arange(rd.size), rd, s=18, color=_COLORS[0], edgecolors="none")
    ax.axhline(cutoff, color=_COLORS[1], lw=0.8)
    ax.set_xlabel("row index")
    ax.set_ylabel("robust distance")
    ax.set_title("robust distances")
    fig.tight_layout()
    return fig


def save_figure(fig: Figure, path: str | os.PathLike, dpi: int = 150) -> None:
    """Render a figure to ``path`` (format from the extension) via the Agg backend."""
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=dpi)
