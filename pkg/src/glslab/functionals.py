"""Entropy, Fisher information and deficit for normalized test functions.

For ||u||_{L2(dgamma)} = 1 the three core quantities are

    entropy  E(u) = int u^2 log u^2 dgamma          (0 log 0 = 0)
    fisher   I(u) = int |grad u|^2 dgamma
    deficit  delta(u) = I(u) - E(u) / 2 >= 0

together with the density moments used by the stability bounds.  Every
integral carries an error estimate from the embedded coarse rule, and the
deficit error combines the two parts as err_I + err_E / 2.

The module also checks two exact integral identities satisfied by smooth v
under the generator L = Laplacian - x . grad:

    int (Lv)^2          = int ||Hess v||_F^2 + int |grad v|^2
    int Lv |grad v|^2/v = -2 int Hess v : (grad v (x) grad v) / v
                          + int |grad v|^4 / v^2

and computes the pressure integrals for P = -log u^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NormalizationError, PositivityError
from .measure import QuadratureGrid, integrate_with_error
from .functions import TestFunction, _require_unit_norm, l2_norm

SUPPORT_FLOOR = 1e-12


def _xlogx(h: np.ndarray) -> np.ndarray:
    out = np.zeros_like(h)
    pos = h > 0
    out[pos] = h[pos] * np.log(h[pos])
    return out


@dataclass(frozen=True)
class FunctionalReport:
    """Core functionals of one normalized test function on one grid."""

    d: int
    entropy: float
    fisher: float
    deficit: float
    ratio_q: float | None
    l2_norm: float
    first_moment: np.ndarray
    second_moment_gap: float
    entropy_error: float
    fisher_error: float
    quadrature_error: float

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "entropy": self.entropy,
            "fisher": self.fisher,
            "deficit": self.deficit,
            "ratio_q": self.ratio_q,
            "l2_norm": self.l2_norm,
            "first_moment": np.asarray(self.first_moment).tolist(),
            "second_moment_gap": self.second_moment_gap,
            "entropy_error": self.entropy_error,
            "fisher_error": self.fisher_error,
            "quadrature_error": self.quadrature_error,
        }


def report(u: TestFunction, grid: QuadratureGrid) -> FunctionalReport:
    """Evaluate entropy, Fisher information and deficit; u must be normalized."""
    norm = l2_norm(u, grid)
    if abs(norm - 1.0) > 1e-8:
        raise NormalizationError(
            f"report requires ||u|| = 1 within 1e-8, got {norm!r}; normalize first"
        )
    x = grid.nodes
    h = u.density(x)
    entropy, ent_err = integrate_with_error(grid, lambda pts: _xlogx(u.density(pts)))
    fisher, fis_err = integrate_with_error(
        grid, lambda pts: (u.gradient(pts) ** 2).sum(axis=1)
    )
    deficit = fisher - 0.5 * entropy
    ratio_q = fisher / entropy if entropy > 0 else None
    m1 = (grid.weights[:, None] * x * h[:, None]).sum(axis=0)
    r2 = (x**2).sum(axis=1)
    gap = float(grid.weights @ (h * (r2 - u.d)))
    return FunctionalReport(
        d=u.d,
        entropy=float(entropy),
        fisher=float(fisher),
        deficit=float(deficit),
        ratio_q=ratio_q,
        l2_norm=float(norm),
        first_moment=m1,
        second_moment_gap=gap,
        entropy_error=float(ent_err),
        fisher_error=float(fis_err),
        quadrature_error=float(fis_err + 0.5 * ent_err),
    )


@dataclass(frozen=True)
class IdentityResult:
    name: str
    lhs: float
    rhs: float
    residual: float
    error: float

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs), 1e-300)
        return abs(self.residual) / scale


def pinsker_gap(u: TestFunction, grid: QuadratureGrid) -> IdentityResult:
    """Margin of E(u) >= ||u^2 - 1||_{L1}^2 / 4 for normalized u."""
    _require_unit_norm(u, grid)
    entropy, ent_err = integrate_with_error(grid, lambda pts: _xlogx(u.density(pts)))
    tv, tv_err = integrate_with_error(grid, lambda pts: np.abs(u.density(pts) - 1.0))
    rhs = 0.25 * tv**2
    return IdentityResult(
        name="pinsker_gap",
        lhs=float(entropy),
        rhs=float(rhs),
        residual=float(entropy - rhs),
        error=float(ent_err + 0.5 * tv * tv_err),
    )


def _generator(v: TestFunction, x: np.ndarray) -> np.ndarray:
    """Lv = Laplacian v - x . grad v at the points x."""
    hess = v.hessian(x)
    grad = v.gradient(x)
    return np.trace(hess, axis1=1, axis2=2) - (x * grad).sum(axis=1)


def bochner_identity(v: TestFunction, grid: QuadratureGrid) -> IdentityResult:
    """int (Lv)^2 dgamma = int ||Hess v||_F^2 dgamma + int |grad v|^2 dgamma."""

    def lhs_term(x: np.ndarray) -> np.ndarray:
        return _generator(v, x) ** 2

    def rhs_term(x: np.ndarray) -> np.ndarray:
        hess = v.hessian(x)
        grad = v.gradient(x)
        return (hess**2).sum(axis=(1, 2)) + (grad**2).sum(axis=1)

    lhs, lhs_err = integrate_with_error(grid, lhs_term)
    rhs, rhs_err = integrate_with_error(grid, rhs_term)
    return IdentityResult(
        name="bochner_identity",
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(lhs - rhs),
        error=float(lhs_err + rhs_err),
    )


def _positive_mask(v: TestFunction, x: np.ndarray) -> np.ndarray:
    vals = v.value(x)
    if vals.min() < 0:
        i = int(vals.argmin())
        raise PositivityError(
            f"function is negative at node {x[i]} (value {vals[i]!r}); "
            "identity integrands divide by v"
        )
    return vals > SUPPORT_FLOOR * max(vals.max(), 1e-300)


def fisher_flux_identity(v: TestFunction, grid: QuadratureGrid) -> IdentityResult:
    """int Lv |grad v|^2 / v = -2 int Hess v:(grad v (x) grad v)/v + int |grad v|^4/v^2.

    Integrands are restricted to the effective support v > 1e-12 max v; a
    negative value at any quadrature node raises PositivityError.
    """

    def lhs_term(x: np.ndarray) -> np.ndarray:
        mask = _positive_mask(v, x)
        vals = v.value(x)
        grad = v.gradient(x)
        out = np.zeros(x.shape[0])
        lv = _generator(v, x)
        out[mask] = lv[mask] * (grad[mask] ** 2).sum(axis=1) / vals[mask]
        return out

    def rhs_term(x: np.ndarray) -> np.ndarray:
        mask = _positive_mask(v, x)
        vals = v.value(x)
        grad = v.gradient(x)
        hess = v.hessian(x)
        out = np.zeros(x.shape[0])
        quad = (hess * grad[:, :, None] * grad[:, None, :]).sum(axis=(1, 2))
        g4 = ((grad**2).sum(axis=1)) ** 2
        out[mask] = -2.0 * quad[mask] / vals[mask] + g4[mask] / vals[mask] ** 2
        return out

    lhs, lhs_err = integrate_with_error(grid, lhs_term)
    rhs, rhs_err = integrate_with_error(grid, rhs_term)
    return IdentityResult(
        name="fisher_flux_identity",
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(lhs - rhs),
        error=float(lhs_err + rhs_err),
    )


@dataclass(frozen=True)
class PressureData:
    """Integrals of the pressure P = -log u^2 against the density h = u^2.

    fisher4 is int |grad P|^2 h dgamma = 4 I(u); laplacian_p and hess_p2 are
    int h Lap P dgamma and int h ||Hess P||_F^2 dgamma.  The exact relation
    laplacian_p = fisher4 - second_moment_gap holds for normalized u, and for
    second_moment_gap <= 0 the chain

        fisher4 <= laplacian_p <= sqrt(d hess_p2)

    is the first stage of the curvature argument; moment_ok records whether
    the chain's moment hypothesis holds.
    """

    d: int
    fisher4: float
    laplacian_p: float
    hess_p2: float
    second_moment_gap: float
    moment_ok: bool
    quadrature_error: float


def pressure_integrals(u: TestFunction, grid: QuadratureGrid) -> PressureData:
    _require_unit_norm(u, grid)

    def fields(x: np.ndarray):
        mask = _positive_mask(u, x)
        vals = u.value(x)
        grad = u.gradient(x)
        hess = u.hessian(x)
        gp = np.zeros_like(grad)
        gp[mask] = -2.0 * grad[mask] / vals[mask, None]
        hp = np.zeros_like(hess)
        gu = grad[mask] / vals[mask, None]
        hp[mask] = 2.0 * gu[:, :, None] * gu[:, None, :] - 2.0 * hess[mask] / vals[mask, None, None]
        h = vals**2
        return h, gp, hp

    def f4_term(x: np.ndarray) -> np.ndarray:
        h, gp, _ = fields(x)
        return h * (gp**2).sum(axis=1)

    def lap_term(x: np.ndarray) -> np.ndarray:
        h, _, hp = fields(x)
        return h * np.trace(hp, axis1=1, axis2=2)

    def frob_term(x: np.ndarray) -> np.ndarray:
        h, _, hp = fields(x)
        return h * (hp**2).sum(axis=(1, 2))

    f4, f4_err = integrate_with_error(grid, f4_term)
    lap, lap_err = integrate_with_error(grid, lap_term)
    frob, frob_err = integrate_with_error(grid, frob_term)
    r2 = (grid.nodes**2).sum(axis=1)
    gap = float(grid.weights @ (u.density(grid.nodes) * (r2 - u.d)))
    return PressureData(
        d=u.d,
        fisher4=float(f4),
        laplacian_p=float(lap),
        hess_p2=float(frob),
        second_moment_gap=gap,
        moment_ok=gap <= 0.0,
        quadrature_error=float(f4_err + lap_err + frob_err),
    )
