"""Precision versus fit time for the exact, grid and dp strategies.

Writes the benchmark table as CSV and prints a short summary per alpha.

    python3 scripts/precision_runtime.py -o results/precision_runtime.csv
"""

import argparse

from kdi import bench
from kdi.data_io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output", default="precision_runtime.csv")
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = bench.BenchConfig(n_train=args.n, n_test=args.n, repeats=args.repeats, seed=args.seed)
    rows = bench.run(cfg)
    write_csv(args.output, list(bench.COLUMNS), bench.rows_as_columns(rows))
    for r in rows:
        print(f"{r.strategy:5s} alpha={r.alpha:<4g} R={r.R:<5d} fit={r.fit_seconds * 1e3:8.2f} ms "
              f"err={r.max_abs_error:.2e}")


if __name__ == "__main__":
    main()
