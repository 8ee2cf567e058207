#!/usr/bin/env python3
"""Run every stability bound on every corpus entry and print a margin table.

Usage:
    python scripts/verify_corpus.py [--bounds name,name] [--grid-order 64]

Exit code 1 if any bound comes back violated.  Skips (unmet preconditions)
are listed with their reason; they do not affect the exit code.
"""

import argparse
import sys
import warnings

from glslab import GaussianMeasureSpec, build_grid, corpus, verify_bounds


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bounds", default=None, help="comma separated (default: all)")
    parser.add_argument("--grid-order", type=int, default=64)
    parser.add_argument("--eps", type=float, default=0.1)
    args = parser.parse_args()

    names = tuple(args.bounds.split(",")) if args.bounds else None
    n_violated = 0
    for entry in corpus.entries():
        grid = build_grid(GaussianMeasureSpec(d=entry.d), args.grid_order)
        u = entry.normalized(grid)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            records = verify_bounds(u, grid, names=names, eps=args.eps)
        print(f"{entry.name} (d = {entry.d}):")
        for rec in records:
            if rec.status == "skipped":
                print(f"  {rec.name:<16s} skipped   {rec.message}")
                continue
            print(
                f"  {rec.name:<16s} {rec.status:<9s} margin = {rec.margin:+.6e}"
                f"  (quadrature error {rec.quadrature_error:.1e})"
            )
            if rec.status == "violated":
                n_violated += 1
    print(f"violated: {n_violated}")
    return 1 if n_violated else 0


if __name__ == "__main__":
    sys.exit(main())
