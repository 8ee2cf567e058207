"""Constrained derivative-free searches over the test function families.

A SearchProblem names a family, a box for its free parameters and an
objective (deficit, Fisher-to-entropy ratio, or the margin of a named
stability bound).  The optimizer is restarted Nelder-Mead with quadratic
hinge penalties for the box; the penalty weight doubles on every restart
so late restarts cannot trade constraint violation for objective value.
Construction failures (sign changes, capacity) are charged a large value
instead of raising, which keeps the simplex inside the feasible set.

The module also fits the small-amplitude scaling of the deficit along the
affine family and evaluates the closed-form squared distance from that
family to the manifold of exponential tilts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConstraintError, LabError
from .measure import GaussianMeasureSpec, QuadratureGrid, build_grid
from .functions import Affine, TestFunction, build_function, normalize
from .functionals import report
from .stability import BOUND_NAMES, verify_bounds

BIG_VALUE = 1e6
OBJECTIVES = ("deficit", "ratio_q", "stab_margin")


@dataclass(frozen=True)
class SearchProblem:
    """One box-constrained search over a parametric family."""

    name: str
    objective: str
    family: str
    d: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    bound: str | None = None
    grid_order: int = 64
    restarts: int = 3
    maxiter: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ConstraintError(
                f"unknown objective {self.objective!r}; known: {OBJECTIVES}"
            )
        if self.objective == "stab_margin":
            if self.bound is None or self.bound not in BOUND_NAMES:
                raise ConstraintError(
                    f"stab_margin needs a bound name from {BOUND_NAMES}, got {self.bound!r}"
                )
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ConstraintError("lower and upper must be nonempty and equally long")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ConstraintError(f"empty box: lower {lower} exceeds upper {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_params(self) -> int:
        return len(self.lower)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "objective": self.objective,
            "family": self.family,
            "d": self.d,
            "lower": list(self.lower),
            "upper": list(self.upper),
            "bound": self.bound,
            "grid_order": self.grid_order,
            "restarts": self.restarts,
            "maxiter": self.maxiter,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchProblem":
        known = {
            "name",
            "objective",
            "family",
            "d",
            "lower",
            "upper",
            "bound",
            "grid_order",
            "restarts",
            "maxiter",
            "seed",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConstraintError(f"unknown search problem fields {sorted(unknown)}")
        return cls(**{k: (tuple(v) if k in ("lower", "upper") else v) for k, v in obj.items()})


def instantiate(problem: SearchProblem, theta: np.ndarray) -> TestFunction:
    """Map a parameter vector into the problem's family."""
    theta = np.asarray(theta, dtype=float)
    if problem.family == "hermite":
        coeffs = [1.0] + theta.tolist()
        return build_function(
            {"family": "hermite", "params": {"coeffs": coeffs}, "d": problem.d}
        )
    if problem.family == "affine":
        return build_function(
            {"family": "affine", "params": {"eps": float(theta[0])}, "d": problem.d}
        )
    if problem.family == "tilt":
        return build_function(
            {"family": "tilt", "params": {"a": theta.tolist()}, "d": problem.d}
        )
    if problem.family == "gaussian":
        return build_function(
            {"family": "gaussian", "params": {"sigma2": theta.tolist()}, "d": problem.d}
        )
    raise ConstraintError(f"family {problem.family!r} is not searchable")


def raw_objective(problem: SearchProblem, theta: np.ndarray, grid: QuadratureGrid) -> float:
    """Objective without penalties; BIG_VALUE for infeasible parameters."""
    try:
        u = normalize(instantiate(problem, theta), grid)
    except LabError:
        return BIG_VALUE
    if problem.objective == "stab_margin":
        bound = verify_bounds(u, grid, names=(problem.bound,))[0]
        if bound.status == "skipped" or not math.isfinite(bound.margin):
            return BIG_VALUE
        return bound.margin
    rep = report(u, grid)
    if problem.objective == "deficit":
        return rep.deficit
    if rep.entropy < 1e-10 or rep.ratio_q is None:
        return BIG_VALUE
    return rep.ratio_q


def box_violation(theta: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    below = np.maximum(lower - theta, 0.0)
    above = np.maximum(theta - upper, 0.0)
    return float((below**2 + above**2).sum())


@dataclass(frozen=True)
class TracePoint:
    evaluation: int
    params: tuple[float, ...]
    objective: float
    penalty: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    problem: SearchProblem
    best_params: tuple[float, ...]
    best_value: float
    best_function: dict | None
    n_evaluations: int
    trace: tuple[TracePoint, ...] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_json(),
            "best_params": list(self.best_params),
            "best_value": self.best_value,
            "best_function": self.best_function,
            "n_evaluations": self.n_evaluations,
            "trace": [
                {
                    "evaluation": p.evaluation,
                    "params": list(p.params),
                    "objective": p.objective,
                    "penalty": p.penalty,
                }
                for p in self.trace
            ],
        }


def minimize_callable(
    f,
    x0: np.ndarray,
    maxiter: int = 200,
) -> tuple[np.ndarray, float, int]:
    """Nelder-Mead wrapper returning the point, value and evaluation count."""
    res = optimize.minimize(
        f,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-9, "fatol": 1e-13},
    )
    return np.asarray(res.x, dtype=float), float(res.fun), int(res.nfev)


def run_search(problem: SearchProblem, grid: QuadratureGrid | None = None) -> SearchResult:
    if grid is None:
        grid = build_grid(GaussianMeasureSpec(d=problem.d), problem.grid_order)
    lower = np.asarray(problem.lower)
    upper = np.asarray(problem.upper)
    rng = np.random.default_rng(problem.seed)
    trace: list[TracePoint] = []
    best_theta: np.ndarray | None = None
    best_val = math.inf
    for restart in range(problem.restarts):
        weight = 1e3 * 2.0**restart

        def penalized(theta: np.ndarray) -> float:
            raw = raw_objective(problem, theta, grid)
            pen = weight * box_violation(theta, lower, upper)
            trace.append(
                TracePoint(
                    evaluation=len(trace),
                    params=tuple(float(v) for v in theta),
                    objective=raw,
                    penalty=pen,
                )
            )
            return raw + pen

        x0 = rng.uniform(lower, upper)
        x, _, _ = minimize_callable(penalized, x0, maxiter=problem.maxiter)
        x = np.clip(x, lower, upper)
        val = raw_objective(problem, x, grid)
        if val < best_val:
            best_val = val
            best_theta = x
    assert best_theta is not None
    try:
        best_fn = instantiate(problem, best_theta).to_json()
    except LabError:
        best_fn = None
    return SearchResult(
        problem=problem,
        best_params=tuple(float(v) for v in best_theta),
        best_value=float(best_val),
        best_function=best_fn,
        n_evaluations=len(trace),
        trace=tuple(trace),
    )


def load_problem(path: str) -> SearchProblem:
    with open(path, "r", encoding="utf-8") as fh:
        return SearchProblem.from_json(json.load(fh))


@dataclass(frozen=True, eq=False)
class ExpansionFit:
    """Log-log fit of the deficit against the perturbation amplitude."""

    eps: np.ndarray
    deficits: np.ndarray
    order: float
    coefficient: float
    residual: float
    excluded: tuple[float, ...]


def epsilon_expansion(
    eps_values,
    grid: QuadratureGrid,
    nu: np.ndarray | None = None,
) -> ExpansionFit:
    """Fit deficit ~ coefficient * eps^order along the affine family 1 + eps x.nu.

    Amplitudes whose deficit is within 5x the quadrature error estimate are
    excluded from the fit; at least two points must survive.
    """
    d = grid.d
    if nu is None:
        nu = np.zeros(d)
        nu[0] = 1.0
    eps_values = np.asarray(sorted(float(e) for e in eps_values))
    if np.any(eps_values <= 0):
        raise ConstraintError("amplitudes must be positive")
    kept_eps, kept_def, excluded = [], [], []
    for e in eps_values:
        u = normalize(Affine(eps=e, nu=nu), grid)
        rep = report(u, grid)
        if rep.deficit <= 5.0 * rep.quadrature_error:
            excluded.append(float(e))
            continue
        kept_eps.append(float(e))
        kept_def.append(rep.deficit)
    if len(kept_eps) < 2:
        raise ConstraintError(
            "fewer than two amplitudes survive the quadrature error screen"
        )
    log_e = np.log(np.asarray(kept_eps))
    log_d = np.log(np.asarray(kept_def))
    slope, intercept = np.polyfit(log_e, log_d, 1)
    fit = slope * log_e + intercept
    return ExpansionFit(
        eps=np.asarray(kept_eps),
        deficits=np.asarray(kept_def),
        order=float(slope),
        coefficient=float(math.exp(intercept)),
        residual=float(np.abs(log_d - fit).max()),
        excluded=tuple(excluded),
    )


def affine_manifold_distance_sq(eps: float) -> float:
    """Squared L2 distance from the normalized affine function at amplitude eps
    to the best-matching normalized exponential tilt; equals eps^4/2 + O(eps^6)."""
    return 2.0 * (1.0 - math.exp(-0.5 * eps**2) * math.sqrt(1.0 + eps**2))
