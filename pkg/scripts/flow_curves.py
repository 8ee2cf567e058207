#!/usr/bin/env python3
"""Tabulate entropy/Fisher/deficit curves along the evolution for the
flow-tagged corpus entries.

Usage:
    python scripts/flow_curves.py [--times 0,0.1,...] [--out-dir curves/]

One CSV per entry (columns t, entropy, fisher, deficit, Q, moment1_norm,
moment2_gap).  Without --out-dir everything goes to stdout, separated by a
comment line naming the entry.
"""

import argparse
import os
import sys

import numpy as np

from glslab import GaussianMeasureSpec, build_grid, corpus, flow_csv_rows, flow_curve


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--times", default="0,0.05,0.1,0.2,0.35,0.5,0.75,1.0,1.5,2.0")
    parser.add_argument("--grid-order", type=int, default=64)
    parser.add_argument("--entries", default=None, help="comma separated names (default: flow tag)")
    parser.add_argument("--out-dir", default=None)
    args = parser.parse_args()

    times = np.array([float(v) for v in args.times.split(",")])
    names = args.entries.split(",") if args.entries else list(corpus.names("flow"))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)

    for name in names:
        entry = corpus.get(name)
        grid = build_grid(GaussianMeasureSpec(d=entry.d), args.grid_order)
        states = flow_curve(entry.normalized(grid), times, grid)
        rows = flow_csv_rows(states)
        if args.out_dir:
            path = os.path.join(args.out_dir, f"{name}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(rows) + "\n")
            print(f"wrote {path} ({len(states)} states)")
        else:
            print(f"# {name} (d = {entry.d})")
            print("\n".join(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
