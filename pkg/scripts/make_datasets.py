#!/usr/bin/env python3
"""Materialize the bundled datasets under data/.

Writes the seeded wine-style quality table and the Wisconsin breast
cancer table (from scikit-learn's bundled copy) as plain CSVs that the
`run` subcommand can ingest.
"""

import argparse
from pathlib import Path

from annotsim.synthdata import (
    WINE_DEFAULT_ROWS,
    WINE_DEFAULT_SEED,
    write_breast_cancer_csv,
    write_wine_like_csv,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="data")
    parser.add_argument("--wine-rows", type=int, default=WINE_DEFAULT_ROWS)
    parser.add_argument("--wine-seed", type=int, default=WINE_DEFAULT_SEED)
    args = parser.parse_args()

    out = Path(args.out_dir)
    wine = write_wine_like_csv(out / "wine_quality.csv", args.wine_rows, args.wine_seed)
    cancer = write_breast_cancer_csv(out / "breast_cancer.csv")
    print(f"wrote {wine}")
    print(f"wrote {cancer}")


if __name__ == "__main__":
    main()
