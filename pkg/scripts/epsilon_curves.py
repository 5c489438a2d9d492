#!/usr/bin/env python3
"""Emit the interval-bound curves over a grid of sample sizes and confidence
levels as CSV files (one per (m, beta) pair), for plotting.

Default grid: m in {250, 500, 1000}, beta in {1e-4, 1e-6, 1e-8}.
"""

import argparse
import time
from pathlib import Path

from share_sense.sensitivity import epsilon_table
from share_sense.serialize import write_epsilon_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="epsilon_curves")
    parser.add_argument("--m", type=int, nargs="+", default=[250, 500, 1000])
    parser.add_argument("--beta", type=float, nargs="+", default=[1e-4, 1e-6, 1e-8])
    args = parser.parse_args()

    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    for m in args.m:
        for beta in args.beta:
            start = time.perf_counter()
            table = epsilon_table(m, beta)
            path = out_root / f"epsilon_m{m}_beta{beta:g}.csv"
            write_epsilon_csv(table, path)
            width = float((table.eps_high - table.eps_low).max())
            print(
                f"m={m} beta={beta:g}: wrote {path} "
                f"(max width {width:.4f}, {time.perf_counter() - start:.1f}s)"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
