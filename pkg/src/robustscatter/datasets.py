"""Access to the wine benchmark data used in examples and tests.

The wine data (178 Italian wines, 13 constituents, three cultivars) is a
classic benchmark for robust estimation; the first cultivar's 59 wines are
the usual subset.  The data is not redistributed with this package: fetch
it once with :func:`fetch_wine` (or ``scripts/fetch_wine.py``), which
downloads from the UCI archive or falls back to the copy bundled with
scikit-learn when offline.
"""

from __future__ import annotations

import io
import os
import urllib.request
from pathlib import Path

from .core import DataMatrix

__all__ = [
    "WINE_URL",
    "WINE_ENV_VAR",
    "FEATURE_NAMES",
    "BIVARIATE_COLUMNS",
    "fetch_wine",
    "load_wine",
    "wine_bivariate",
]

WINE_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/wine/wine.data"
WINE_ENV_VAR = "ROBUST_SCATTER_WINE"
DEFAULT_PATH = Path("data") / "wine_first_cultivar.csv"

FEATURE_NAMES = (
    "alcohol",
    "malic_acid",
    "ash",
    "alcalinity_of_ash",
    "magnesium",
    "total_phenols",
    "flavanoids",
    "nonflavanoid_phenols",
    "proanthocyanins",
    "color_intensity",
    "hue",
    "od280_od315",
    "proline",
)

# The two-variable subset used throughout the examples.
BIVARIATE_COLUMNS = ("malic_acid", "proline")


def _rows_from_uci(timeout: float) -> list[list[float]]:
    with urllib.request.urlopen(WINE_URL, timeout=timeout) as response:
        text = io.TextIOWrapper(response, encoding="utf-8").read()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        fields = [float(f) for f in line.split(",")]
        if int(fields[0]) == 1:
            rows.append(fields[1:])
    return rows


def _rows_from_sklearn() -> list[list[float]]:
    from sklearn.datasets import load_wine as _load

    bunch = _load()
    return [list(map(float, row)) for row, t in zip(bunch.data, bunch.target) if t == 0]


def fetch_wine(dest: str | os.PathLike = DEFAULT_PATH, timeout: float = 15.0) -> Path:
    """Download the first-cultivar wine data and write it as a CSV.

    Tries the UCI archive first, then the scikit-learn bundled copy.
    Returns the written path; raises :class:`RuntimeError` when neither
    source is available.
    """
    try:
        rows = _rows_from_uci(timeout)
        source = "UCI archive"
    except Exception:
        try:
            rows = _rows_from_sklearn()
            source = "scikit-learn bundled copy"
        except Exception as exc:
            raise RuntimeError(
                "could not fetch the wine data: no network access to the UCI archive "
                "and scikit-learn is not installed"
            ) from exc
    if len(rows) != 59 or any(len(r) != 13 for r in rows):
        raise RuntimeError(f"unexpected wine data shape from {source}: {len(rows)} rows")
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write(",".join(FEATURE_NAMES) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    return dest


def load_wine(path: str | os.PathLike | None = None) -> DataMatrix:
    """Load the 59 first-cultivar wines with all 13 constituents.

    Looks for a fetched CSV at ``path``, then at the path in the
    ``ROBUST_SCATTER_WINE`` environment variable, then at
    ``data/wine_first_cultivar.csv``; finally falls back to the
    scikit-learn bundled copy.  Raises :class:`FileNotFoundError` with
    fetch instructions when the data is nowhere to be found.
    """
    candidates = []
    if path is not None:
        candidates.append(Path(path))
    env = os.environ.get(WINE_ENV_VAR)
    if env:
        candidates.append(Path(env))
    candidates.append(DEFAULT_PATH)
    for cand in candidates:
        if cand.is_file():
            return _read_csv(cand)
    try:
        rows = _rows_from_sklearn()
    except Exception:
        raise FileNotFoundError(
            "wine data not found; run scripts/fetch_wine.py (or robustscatter.datasets.fetch_wine) "
            f"once, or point {WINE_ENV_VAR} at the CSV"
        ) from None
    import numpy as np

    return DataMatrix(np.asarray(rows), column_names=FEATURE_NAMES)


def _read_csv(path: Path) -> DataMatrix:
    import numpy as np

    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if tuple(header) != FEATURE_NAMES:
        raise ValueError(f"{path} does not look like the fetched wine CSV")
    return DataMatrix(values, column_names=FEATURE_NAMES)


def wine_bivariate(wine: DataMatrix) -> DataMatrix:
    """The (malic acid, proline) projection of the wine data."""
    idx = [FEATURE_NAMES.index(c) for c in BIVARIATE_COLUMNS]
    return DataMatrix(wine.values[:, idx], column_names=BIVARIATE_COLUMNS)
