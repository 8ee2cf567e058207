"""Explicit stability bounds for the Gaussian log-Sobolev deficit.

Every bound is checked as a StabilityBound record with measured left and
right hand sides, the margin lhs - rhs, and a status:

    verified   constraints hold and margin >= -2 x quadrature error
    violated   constraints hold and the margin is genuinely negative
    skipped    a constraint of the statement is not met by this instance

The bounds, for normalized u with density nu = u^2 dgamma, deficit
delta = I - E/2 and second moment gap A = int (|x|^2 - d) dnu:

    entropy_squared   delta >= E^2 / (2d)                 needs A <= 0
    fisher_gap        delta >= psi(I)                      needs A <= 0
    kappa_weighted    delta >= kappa^2 E^2 / 2             needs barycenter 0
    log_concave       I >= (C*/2) E                        needs log-concave nu,
                                                           barycenter 0
    compact_support   I >= (C(R)/2) E                      needs supp u in B_R,
                                                           barycenter 0
    gaussian_tail     I >= (C_tail/2) E                    needs finite
                                                           int e^{eps|x|^2} dnu,
                                                           barycenter 0

with psi(s) = s - (d/4) log(1 + 4s/d), C* = 1 + 1/1728, and the improved
constants built by running the flow to an explicit waiting time and pulling
the Fisher-to-entropy ratio Q = I/E back along its comparison ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, DomainError
from .measure import QuadratureGrid, integrate_with_error
from .functions import TestFunction, second_moment_gap
from .functionals import FunctionalReport, report
from .logconcavity import LogConcavityCertificate, certify
from .ou_flow import evolve

C_STAR = 1.0 + 1.0 / 1728.0
POINCARE_LOGCONCAVE = 1.0 / 432.0
HALVED_CDC = 1.0 / 864.0
GAUSSIAN_CHEEGER = math.sqrt(2.0 / math.pi)

CENTER_TOL = 1e-8
BOUND_NAMES = (
    "entropy_squared",
    "fisher_gap",
    "kappa_weighted",
    "log_concave",
    "compact_support",
    "gaussian_tail",
)


def psi(s: float, d: int) -> float:
    """psi(s) = s - (d/4) log(1 + 4s/d); the deficit lower bound at Fisher level s."""
    if s < 0:
        raise DomainError(f"psi needs s >= 0, got {s}")
    return s - 0.25 * d * math.log1p(4.0 * s / d)


def phi(s: float, d: int) -> float:
    """Inverse view of the same bound: I >= phi(E) with phi(s) = (d/4)(e^{2s/d} - 1)."""
    return 0.25 * d * math.expm1(2.0 * s / d)


def phi_inv(s: float, d: int) -> float:
    if s < 0:
        raise DomainError(f"phi_inv needs s >= 0, got {s}")
    return 0.5 * d * math.log1p(4.0 * s / d)


def t_star_compact(radius: float) -> float:
    """Waiting time log(1 + R^2)/2 after which a radius-R density is log-concave."""
    if radius <= 0:
        raise DomainError(f"support radius must be positive, got {radius}")
    return 0.5 * math.log1p(radius**2)


def improved_constant_compact(radius: float) -> float:
    """C(R) = 1 + (C* - 1) / (1 + C* R^2), decreasing to 1 as R grows."""
    if radius <= 0:
        raise DomainError(f"support radius must be positive, got {radius}")
    return 1.0 + (C_STAR - 1.0) / (1.0 + C_STAR * radius**2)


def t_star_tail(eps: float) -> float:
    """Waiting time log(1 + 1/eps)/2 attached to the tail weight e^{eps |x|^2}."""
    if eps <= 0:
        raise DomainError(f"tail exponent must be positive, got {eps}")
    return 0.5 * math.log1p(1.0 / eps)


def tau_of_t(t: float) -> float:
    """Variance-like clock tau(t) = (e^{2t} - 1)/2 of the reversed heat flow."""
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    return 0.5 * math.expm1(2.0 * t)


def q0_lower_bound(q: float, t: float) -> float:
    """Lower bound on Q(0) given Q(t) >= q, from dQ/dt <= 2Q(2Q - 1).

    Writing rho = 2 - 1/Q the comparison ODE linearizes to rho' <= 2 rho.
    """
    if not 0 < q:
        raise DomainError(f"need a positive ratio, got {q}")
    growth = math.expm1(2.0 * t)
    return 0.5 * (1.0 + (2.0 * q - 1.0) / (1.0 + 2.0 * q * growth))


def lambda1_tail_lower(eps: float, a_tail: float, t: float) -> float:
    """Poincare constant of the time-t evolved measure from the tail weight.

    Valid once eps tau(t) > 1; then 1/lambda1 <= tau (p/(p-1) + A^{1/(p-1)})
    with p = eps tau and A the tail integral, which must be >= 1.
    """
    if a_tail < 1.0:
        raise DomainError(f"tail integral must be >= 1, got {a_tail}")
    tau = tau_of_t(t)
    p = eps * tau
    if p <= 1.0:
        raise DomainError(
            f"need eps tau > 1 for the tail estimate; eps = {eps}, t = {t} give {p}"
        )
    inv = tau * (p / (p - 1.0) + a_tail ** (1.0 / (p - 1.0)))
    return 1.0 / inv


def constants_table() -> dict:
    """All named constants plus the exact relations tying them together."""
    return {
        "c_star": C_STAR,
        "poincare_logconcave": POINCARE_LOGCONCAVE,
        "halved_cdc": HALVED_CDC,
        "gaussian_cheeger": GAUSSIAN_CHEEGER,
        "relations": {
            "c_star_from_halved_cdc": 0.5 * (2.0 + HALVED_CDC),
            "poincare_is_double_cdc": 2.0 * HALVED_CDC,
        },
    }


@dataclass(frozen=True)
class PoincareEstimate:
    """Spectral gap chain for an isotropic log-concave measure with second
    moment s: Cheeger constant h >= 1/(6 sqrt(3 s)), then h^2/4 <= lambda1
    <= 36 h^2, and the direct bound lambda1 >= (d/s)/432."""

    d: int
    second_moment: float
    cheeger_lower: float
    lambda1_lower: float
    lambda1_logconcave: float

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "second_moment": self.second_moment,
            "cheeger_lower": self.cheeger_lower,
            "lambda1_lower": self.lambda1_lower,
            "lambda1_logconcave": self.lambda1_logconcave,
        }


def poincare_chain(second_moment: float, d: int) -> PoincareEstimate:
    if second_moment <= 0:
        raise DomainError(f"second moment must be positive, got {second_moment}")
    h = 1.0 / (6.0 * math.sqrt(3.0 * second_moment))
    return PoincareEstimate(
        d=d,
        second_moment=second_moment,
        cheeger_lower=h,
        lambda1_lower=h**2 / 4.0,
        lambda1_logconcave=(d / second_moment) / 432.0,
    )


def cheeger_sandwich(h: float) -> tuple[float, float]:
    """The two-sided spectral gap estimate h^2/4 <= lambda1 <= 36 h^2."""
    if h <= 0:
        raise DomainError(f"Cheeger constant must be positive, got {h}")
    return h**2 / 4.0, 36.0 * h**2


@dataclass(frozen=True)
class StabilityBound:
    """One verified instance of one deficit bound."""

    name: str
    lhs: float
    rhs: float
    margin: float
    constant: float
    exponent: float
    distance: float
    quadrature_error: float
    status: str
    constraints: dict = field(default_factory=dict)
    message: str = ""
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "constant": self.constant,
            "exponent": self.exponent,
            "distance": self.distance,
            "quadrature_error": self.quadrature_error,
            "status": self.status,
            "constraints": dict(self.constraints),
            "message": self.message,
            "extras": {k: float(v) for k, v in self.extras.items()},
        }


def _status(margin: float, qerr: float) -> str:
    return "verified" if margin >= -2.0 * qerr else "violated"


def _skipped(name: str, rep: FunctionalReport, constraints: dict, message: str) -> StabilityBound:
    return StabilityBound(
        name=name,
        lhs=float("nan"),
        rhs=float("nan"),
        margin=float("nan"),
        constant=float("nan"),
        exponent=float("nan"),
        distance=float("nan"),
        quadrature_error=rep.quadrature_error,
        status="skipped",
        constraints=constraints,
        message=message,
    )


def _centered(rep: FunctionalReport) -> bool:
    return float(np.linalg.norm(rep.first_moment)) <= CENTER_TOL + 2.0 * rep.quadrature_error


def verify_entropy_squared(u: TestFunction, grid: QuadratureGrid) -> StabilityBound:
    """delta >= E^2 / (2d) for densities with second moment at most d."""
    rep = report(u, grid)
    constraints = {"second_moment_at_most_d": rep.second_moment_gap <= 2.0 * rep.quadrature_error}
    if not constraints["second_moment_at_most_d"]:
        return _skipped(
            "entropy_squared",
            rep,
            constraints,
            f"second moment gap {rep.second_moment_gap:.3e} is positive",
        )
    rhs = rep.entropy**2 / (2.0 * u.d)
    margin = rep.deficit - rhs
    return StabilityBound(
        name="entropy_squared",
        lhs=rep.deficit,
        rhs=rhs,
        margin=margin,
        constant=1.0 / (2.0 * u.d),
        exponent=2.0,
        distance=rep.entropy,
        quadrature_error=rep.quadrature_error,
        status=_status(margin, rep.quadrature_error),
        constraints=constraints,
        extras={"entropy": rep.entropy, "deficit": rep.deficit},
    )


def verify_fisher_gap(u: TestFunction, grid: QuadratureGrid) -> StabilityBound:
    """delta >= psi(I), equivalently I >= phi(E), under the same moment condition."""
    rep = report(u, grid)
    constraints = {"second_moment_at_most_d": rep.second_moment_gap <= 2.0 * rep.quadrature_error}
    if not constraints["second_moment_at_most_d"]:
        return _skipped(
            "fisher_gap",
            rep,
            constraints,
            f"second moment gap {rep.second_moment_gap:.3e} is positive",
        )
    rhs = psi(rep.fisher, u.d)
    margin = rep.deficit - rhs
    # psi(phi(E)) >= E^2/(2d): the bound dominates entropy_squared on its domain
    cross = psi(phi(rep.entropy, u.d), u.d) - rep.entropy**2 / (2.0 * u.d)
    return StabilityBound(
        name="fisher_gap",
        lhs=rep.deficit,
        rhs=rhs,
        margin=margin,
        constant=float("nan"),
        exponent=float("nan"),
        distance=rep.fisher,
        quadrature_error=rep.quadrature_error,
        status=_status(margin, rep.quadrature_error),
        constraints=constraints,
        extras={
            "fisher": rep.fisher,
            "entropy": rep.entropy,
            "psi_at_phi_margin": cross,
        },
    )


def kappa_weight(u: TestFunction, grid: QuadratureGrid) -> float:
    """kappa = ||u|| / max(sqrt d, ||(x - x0) u||) with x0 the density barycenter."""
    rep = report(u, grid)
    x = grid.nodes - rep.first_moment[None, :]
    moment = float(grid.weights @ (u.density(grid.nodes) * (x**2).sum(axis=1)))
    return rep.l2_norm / max(math.sqrt(u.d), math.sqrt(moment))


def verify_kappa_weighted(u: TestFunction, grid: QuadratureGrid) -> StabilityBound:
    """delta >= kappa^2 E^2 / 2 for centered u; no second moment restriction."""
    rep = report(u, grid)
    constraints = {"centered": _centered(rep)}
    if not constraints["centered"]:
        return _skipped(
            "kappa_weighted",
            rep,
            constraints,
            f"barycenter norm {float(np.linalg.norm(rep.first_moment)):.3e} is not zero",
        )
    kappa = kappa_weight(u, grid)
    rhs = 0.5 * kappa**2 * rep.entropy**2
    margin = rep.deficit - rhs
    return StabilityBound(
        name="kappa_weighted",
        lhs=rep.deficit,
        rhs=rhs,
        margin=margin,
        constant=0.5 * kappa**2,
        exponent=2.0,
        distance=rep.entropy,
        quadrature_error=rep.quadrature_error,
        status=_status(margin, rep.quadrature_error),
        constraints=constraints,
        extras={"kappa": kappa},
    )


def verify_log_concave(
    u: TestFunction,
    grid: QuadratureGrid,
    certificate: LogConcavityCertificate,
) -> StabilityBound:
    """I >= (C*/2) E for centered log-concave densities, C* = 1 + 1/1728."""
    rep = report(u, grid)
    constraints = {
        "centered": _centered(rep),
        "log_concave": certificate.certified,
    }
    if not certificate.certified:
        return _skipped(
            "log_concave",
            rep,
            constraints,
            f"log-concavity certificate is {certificate.status!r}",
        )
    if not constraints["centered"]:
        return _skipped(
            "log_concave",
            rep,
            constraints,
            f"barycenter norm {float(np.linalg.norm(rep.first_moment)):.3e} is not zero",
        )
    rhs = 0.5 * C_STAR * rep.entropy
    margin = rep.fisher - rhs
    return StabilityBound(
        name="log_concave",
        lhs=rep.fisher,
        rhs=rhs,
        margin=margin,
        constant=0.5 * C_STAR,
        exponent=1.0,
        distance=rep.entropy,
        quadrature_error=rep.quadrature_error,
        status=_status(margin, rep.quadrature_error),
        constraints=constraints,
        extras={"min_eigenvalue": certificate.min_eigenvalue},
    )


def verify_compact_support(u: TestFunction, grid: QuadratureGrid) -> StabilityBound:
    """I >= (C(R)/2) E for centered u supported in a ball of radius R."""
    if u.support_radius is None:
        raise ConstraintError(
            f"compact_support needs a compactly supported family, got {u.family!r}"
        )
    rep = report(u, grid)
    constraints = {"centered": _centered(rep), "compact_support": True}
    if not constraints["centered"]:
        return _skipped(
            "compact_support",
            rep,
            constraints,
            f"barycenter norm {float(np.linalg.norm(rep.first_moment)):.3e} is not zero",
        )
    radius = float(u.support_radius)
    c_r = improved_constant_compact(radius)
    rhs = 0.5 * c_r * rep.entropy
    margin = rep.fisher - rhs
    return StabilityBound(
        name="compact_support",
        lhs=rep.fisher,
        rhs=rhs,
        margin=margin,
        constant=0.5 * c_r,
        exponent=1.0,
        distance=rep.entropy,
        quadrature_error=rep.quadrature_error,
        status=_status(margin, rep.quadrature_error),
        constraints=constraints,
        extras={"support_radius": radius, "t_star": t_star_compact(radius)},
    )


@dataclass(frozen=True)
class TailWeight:
    """Ingredients of the tail-based constant for one instance."""

    eps: float
    a_tail: float
    t0: float
    lambda1_lower: float
    c0: float
    constant: float
    quadrature_error: float


def tail_weight(
    u: TestFunction, grid: QuadratureGrid, eps: float, t0: float | None = None
) -> TailWeight:
    """Constant C_tail from the Gaussian tail integral int e^{eps|x|^2} dnu.

    The integral converges against the quadrature only for eps < 1/4; the
    default waiting time t0 = 2 t*(eps) = log(1 + 1/eps) keeps eps tau(t0) > 1.
    The Poincare constant of the evolved measure is assumed to obey the tail
    estimate, which holds whenever the tail integral is finite.
    """
    if not 0.0 < eps < 0.25:
        raise DomainError(f"tail exponent must lie in (0, 1/4), got {eps}")
    a_tail, a_err = integrate_with_error(
        grid,
        lambda pts: u.density(pts) * np.exp(eps * (pts**2).sum(axis=1)),
    )
    if t0 is None:
        t0 = 2.0 * t_star_tail(eps)
    lam = lambda1_tail_lower(eps, max(float(a_tail), 1.0), t0)
    c0 = 1.0 + 0.25 * lam
    constant = 1.0 + (c0 - 1.0) / (1.0 + c0 * math.expm1(2.0 * t0))
    return TailWeight(
        eps=eps,
        a_tail=float(a_tail),
        t0=float(t0),
        lambda1_lower=lam,
        c0=c0,
        constant=constant,
        quadrature_error=float(a_err),
    )


def verify_gaussian_tail(
    u: TestFunction,
    grid: QuadratureGrid,
    eps: float = 0.1,
    t0: float | None = None,
) -> StabilityBound:
    """I >= (C_tail/2) E for centered u with finite Gaussian tail integral."""
    rep = report(u, grid)
    tail = tail_weight(u, grid, eps, t0=t0)
    constraints = {"centered": _centered(rep), "tail_integrable": math.isfinite(tail.a_tail)}
    if not constraints["tail_integrable"]:
        return _skipped(
            "gaussian_tail", rep, constraints, f"tail integral diverged for eps = {eps}"
        )
    if not constraints["centered"]:
        return _skipped(
            "gaussian_tail",
            rep,
            constraints,
            f"barycenter norm {float(np.linalg.norm(rep.first_moment)):.3e} is not zero",
        )
    rhs = 0.5 * tail.constant * rep.entropy
    margin = rep.fisher - rhs
    return StabilityBound(
        name="gaussian_tail",
        lhs=rep.fisher,
        rhs=rhs,
        margin=margin,
        constant=0.5 * tail.constant,
        exponent=1.0,
        distance=rep.entropy,
        quadrature_error=rep.quadrature_error + tail.quadrature_error,
        status=_status(margin, rep.quadrature_error + tail.quadrature_error),
        constraints=constraints,
        extras={
            "eps": tail.eps,
            "a_tail": tail.a_tail,
            "t0": tail.t0,
            "lambda1_lower": tail.lambda1_lower,
        },
    )


def verify_bounds(
    u: TestFunction,
    grid: QuadratureGrid,
    names: tuple[str, ...] | None = None,
    eps: float = 0.1,
) -> list[StabilityBound]:
    """Run the named bounds (default: all) on one instance.

    Statement preconditions that fail structurally (no compact support, no
    certificate) come back as skipped records rather than raising.
    """
    if names is None:
        names = BOUND_NAMES
    unknown = set(names) - set(BOUND_NAMES)
    if unknown:
        raise ConstraintError(f"unknown bound names {sorted(unknown)}; known: {BOUND_NAMES}")
    out: list[StabilityBound] = []
    rep = report(u, grid)
    for name in names:
        if name == "entropy_squared":
            out.append(verify_entropy_squared(u, grid))
        elif name == "fisher_gap":
            out.append(verify_fisher_gap(u, grid))
        elif name == "kappa_weighted":
            out.append(verify_kappa_weighted(u, grid))
        elif name == "log_concave":
            cert = certify(u, grid)
            out.append(verify_log_concave(u, grid, cert))
        elif name == "compact_support":
            if u.support_radius is None:
                out.append(
                    _skipped(
                        "compact_support",
                        rep,
                        {"compact_support": False},
                        f"family {u.family!r} has unbounded support",
                    )
                )
            else:
                out.append(verify_compact_support(u, grid))
        elif name == "gaussian_tail":
            try:
                out.append(verify_gaussian_tail(u, grid, eps=eps))
            except DomainError as exc:
                out.append(_skipped("gaussian_tail", rep, {"tail_integrable": False}, str(exc)))
    return out


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Trace of the waiting-time argument for one compactly supported instance."""

    support_radius: float
    t_star: float
    q0: float | None
    q_tstar: float | None
    q0_bound: float
    constant: float
    certificate: LogConcavityCertificate
    status: str
    message: str = ""

    def to_json(self) -> dict:
        return {
            "support_radius": self.support_radius,
            "t_star": self.t_star,
            "q0": self.q0,
            "q_tstar": self.q_tstar,
            "q0_bound": self.q0_bound,
            "constant": self.constant,
            "certificate": self.certificate.to_json(),
            "status": self.status,
            "message": self.message,
        }


def compact_improvement_pipeline(u: TestFunction, grid: QuadratureGrid) -> PipelineResult:
    """Run the three stages behind the compact-support constant on one instance:
    evolve to t*(R), certify log-concavity there, check Q(t*) >= C*/2, and
    compare the measured Q(0) with the pulled-back lower bound C(R)/2."""
    if u.support_radius is None:
        raise ConstraintError(
            f"the pipeline needs a compactly supported family, got {u.family!r}"
        )
    radius = float(u.support_radius)
    t_star = t_star_compact(radius)
    bound = q0_lower_bound(0.5 * C_STAR, t_star)
    rep = report(u, grid)
    state = evolve(u, t_star, grid)
    cert = certify(state.v, grid)
    if rep.entropy < 1e-12 or rep.ratio_q is None or state.ratio_q is None:
        return PipelineResult(
            support_radius=radius,
            t_star=t_star,
            q0=rep.ratio_q,
            q_tstar=state.ratio_q,
            q0_bound=bound,
            constant=improved_constant_compact(radius),
            certificate=cert,
            status="skipped",
            message="entropy vanishes; the ratio Q is undefined",
        )
    ok_cert = cert.certified
    tol = 1e-8 + 2.0 * (state.quadrature_error + rep.quadrature_error)
    ok_half = state.ratio_q >= 0.5 * C_STAR - tol
    ok_q0 = rep.ratio_q >= bound - tol
    status = "verified" if (ok_cert and ok_half and ok_q0) else "violated"
    msgs = []
    if not ok_cert:
        msgs.append(f"certificate at t* is {cert.status!r}")
    if not ok_half:
        msgs.append(f"Q(t*) = {state.ratio_q!r} fell below C*/2")
    if not ok_q0:
        msgs.append(f"Q(0) = {rep.ratio_q!r} fell below the pulled-back bound {bound!r}")
    return PipelineResult(
        support_radius=radius,
        t_star=t_star,
        q0=rep.ratio_q,
        q_tstar=state.ratio_q,
        q0_bound=bound,
        constant=improved_constant_compact(radius),
        certificate=cert,
        status=status,
        message="; ".join(msgs),
    )


@dataclass(frozen=True)
class ZOdeSample:
    t: float
    z: float
    dz_dt: float
    bound: float
    margin: float


def excess_moment_decay_check(
    u: TestFunction,
    grid: QuadratureGrid,
    times: np.ndarray,
    dt: float = 1e-3,
    inner_order: int | None = None,
) -> list[ZOdeSample]:
    """Comparison ODE for z(t) = e^{2t} I(t) when the excess moment is positive.

    With A0 = int (|x|^2 - d) u^2 dgamma > 0 the flow obeys

        z'(t) <= -(e^{-2t} / (2d)) (4 z(t) - A0)^2,

    checked by centered differences at each sample time.
    """
    a0 = second_moment_gap(u, grid)
    if a0 <= 0:
        raise ConstraintError(
            f"excess_moment_decay needs a positive second moment gap, got {a0:.3e}"
        )
    samples: list[ZOdeSample] = []
    for t in np.asarray(times, dtype=float):
        if t <= dt:
            raise DomainError(f"sample times must exceed dt = {dt}")
        lo = evolve(u, t - dt, grid, inner_order=inner_order)
        hi = evolve(u, t + dt, grid, inner_order=inner_order)
        mid = evolve(u, t, grid, inner_order=inner_order)
        z_lo = math.exp(2.0 * (t - dt)) * lo.fisher
        z_hi = math.exp(2.0 * (t + dt)) * hi.fisher
        z_mid = math.exp(2.0 * t) * mid.fisher
        dz = (z_hi - z_lo) / (2.0 * dt)
        bound = -(math.exp(-2.0 * t) / (2.0 * u.d)) * (4.0 * z_mid - a0) ** 2
        samples.append(
            ZOdeSample(
                t=float(t),
                z=float(z_mid),
                dz_dt=float(dz),
                bound=float(bound),
                margin=float(bound - dz),
            )
        )
    return samples
