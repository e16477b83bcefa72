#!/usr/bin/env python
"""Fetch the first-cultivar wine data into data/wine_first_cultivar.csv.

The wine data is not redistributed with the package.  This script downloads
it from the UCI archive (or falls back to the copy bundled with
scikit-learn when offline) and writes the 59 first-cultivar rows with all
13 constituents as a headered CSV.  Run it once before using the wine
examples or the acceptance tests that need the data.

Usage: python scripts/fetch_wine.py [DEST]
"""

import sys

from robustscatter.datasets import DEFAULT_PATH, fetch_wine


def main() -> int:
    dest = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_PATH
    try:
        path = fetch_wine(dest)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
