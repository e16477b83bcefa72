import hashlib

import numpy as np
import pytest

from robustscatter.datasets import load_wine, wine_bivariate

_WINE_SKIP = (
    "wine data unavailable: run scripts/fetch_wine.py once (downloads from the UCI "
    "archive, or uses the scikit-learn bundled copy when offline)"
)


@pytest.fixture(scope="session")
def wine13():
    """The 59 first-cultivar wines, all 13 constituents."""
    try:
        return load_wine()
    except FileNotFoundError:
        pytest.skip(_WINE_SKIP)


@pytest.fixture(scope="session")
def wine2(wine13):
    """The (malic acid, proline) projection."""
    return wine_bivariate(wine13)


def rng_for(*key) -> np.random.Generator:
    """Seeded generator keyed by the test's own tuple, independent of order."""
    ints = [
        k if isinstance(k, int) else int.from_bytes(hashlib.sha256(str(k).encode()).digest()[:8], "little")
        for k in key
    ]
    return np.random.default_rng(np.random.SeedSequence(ints))
