"""Numerical certification that a density u^2 dgamma is log-concave.

Log-concavity of h dgamma with h = u^2 is equivalent to

    M(x) = I - Hess log h(x)  >=  0   wherever h > 0,

so the certifier samples M on the quadrature nodes plus a deterministic
low-discrepancy cloud in the box |x|_inf <= 6, masks points with
h <= 1e-10 max h, and inspects the smallest eigenvalue.  Verdicts:

    certified     min eig >= -tol        with tol = 1e-8 max(1, scale)
    refuted       min eig <  -10 tol
    inconclusive  in between, or every probe masked

where scale is the largest eigenvalue magnitude seen.  The inconclusive
band keeps borderline curvature from flipping with the probe set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .measure import QuadratureGrid
from .functions import TestFunction
from .ou_flow import FlowState, evolve

PROBE_RADIUS = 6.0
SUPPORT_THRESHOLD = 1e-10
BASE_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class LogConcavityCertificate:
    status: str
    min_eigenvalue: float
    worst_point: np.ndarray
    n_probes: int
    n_active: int
    threshold: float
    tolerance: float

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "min_eigenvalue": self.min_eigenvalue,
            "worst_point": np.asarray(self.worst_point).tolist(),
            "n_probes": self.n_probes,
            "n_active": self.n_active,
            "threshold": self.threshold,
            "tolerance": self.tolerance,
        }


def _probe_cloud(d: int, n: int) -> np.ndarray:
    sampler = qmc.Halton(d=d, scramble=False)
    return (2.0 * PROBE_RADIUS) * sampler.random(n) - PROBE_RADIUS


def certify(
    u: TestFunction, grid: QuadratureGrid, n_probes: int | None = None
) -> LogConcavityCertificate:
    d = u.d
    if n_probes is None:
        n_probes = 512 * d
    probes = np.vstack([grid.nodes, _probe_cloud(d, n_probes)])
    h = u.density(probes)
    threshold = SUPPORT_THRESHOLD * max(float(h.max()), 1e-300)
    active = h > threshold
    if not active.any():
        return LogConcavityCertificate(
            status="inconclusive",
            min_eigenvalue=float("nan"),
            worst_point=np.full(d, float("nan")),
            n_probes=probes.shape[0],
            n_active=0,
            threshold=threshold,
            tolerance=BASE_TOLERANCE,
        )
    pts = probes[active]
    curv = np.eye(d)[None, :, :] - u.hess_log_density(pts)
    eigs = np.linalg.eigvalsh(curv)
    mins = eigs[:, 0]
    scale = max(1.0, float(np.abs(eigs).max()))
    tol = BASE_TOLERANCE * scale
    worst = int(mins.argmin())
    min_eig = float(mins[worst])
    if min_eig >= -tol:
        status = "certified"
    elif min_eig < -10.0 * tol:
        status = "refuted"
    else:
        status = "inconclusive"
    return LogConcavityCertificate(
        status=status,
        min_eigenvalue=min_eig,
        worst_point=pts[worst].copy(),
        n_probes=probes.shape[0],
        n_active=int(active.sum()),
        threshold=threshold,
        tolerance=tol,
    )


def certify_along_flow(
    u0: TestFunction,
    times: np.ndarray,
    grid: QuadratureGrid,
    n_probes: int | None = None,
    inner_order: int | None = None,
) -> list[tuple[FlowState, LogConcavityCertificate]]:
    """Certificates for the evolved density at each time; t = 0 is allowed."""
    out = []
    for t in np.asarray(times, dtype=float):
        state = evolve(u0, float(t), grid, inner_order=inner_order)
        out.append((state, certify(state.v, grid, n_probes=n_probes)))
    return out


def certificate_at_tstar(
    u0: TestFunction,
    support_radius: float,
    grid: QuadratureGrid,
    n_probes: int | None = None,
) -> tuple[float, LogConcavityCertificate]:
    """Certificate at the waiting time t* = log(1 + R^2) / 2 for support radius R."""
    if support_radius <= 0:
        raise ValueError(f"support radius must be positive, got {support_radius}")
    t_star = 0.5 * math.log1p(support_radius**2)
    state = evolve(u0, t_star, grid)
    return t_star, certify(state.v, grid, n_probes=n_probes)
