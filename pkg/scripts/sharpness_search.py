#!/usr/bin/env python3
"""How sharp is the inequality near its equality cases?

Two experiments:
  1. fit the small-amplitude scaling of the deficit along 1 + eps x
     (expected: 0.5 eps^4) and compare with the closed-form squared
     distance to the tilt manifold;
  2. search the cubic Hermite box for the smallest deficit reachable
     away from the manifold.

Usage:
    python scripts/sharpness_search.py [--d 1] [--seed 0]
"""

import argparse
import sys

import numpy as np

from glslab import (
    GaussianMeasureSpec,
    SearchProblem,
    affine_manifold_distance_sq,
    build_grid,
    epsilon_expansion,
    run_search,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=int, default=1, choices=(1, 2, 3))
    parser.add_argument("--grid-order", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    grid = build_grid(GaussianMeasureSpec(d=args.d), args.grid_order)

    eps = [0.003, 0.01, 0.03, 0.1]
    fit = epsilon_expansion(eps, grid)
    print(f"affine family, d = {args.d}:")
    print(f"  deficit ~ {fit.coefficient:.6f} * eps^{fit.order:.4f}  (log-log residual {fit.residual:.2e})")
    for e, de in zip(fit.eps, fit.deficits):
        dist2 = affine_manifold_distance_sq(e)
        print(f"  eps = {e:<7g} deficit = {de:.6e}  manifold dist^2 = {dist2:.6e}  ratio = {de / dist2:.4f}")

    problem = SearchProblem(
        name="hermite_min_deficit",
        objective="deficit",
        family="hermite",
        d=1,
        lower=(-0.05, -0.08, -0.03),
        upper=(0.05, 0.08, 0.03),
        grid_order=args.grid_order,
        seed=args.seed,
    )
    result = run_search(problem)
    print("hermite search (coefficients of He1..He3 on top of 1):")
    print(f"  best deficit = {result.best_value:.3e} at {tuple(round(p, 6) for p in result.best_params)}")
    print(f"  {result.n_evaluations} evaluations over {problem.restarts} restarts")
    return 0


if __name__ == "__main__":
    sys.exit(main())
