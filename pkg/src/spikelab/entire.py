"""Finite-mass entire solutions of -Delta(w) = [w]_+^p and the 1-D family.

A finite-mass planar solution is, up to translation, an Emden core of
free-boundary radius R glued C1 to a logarithmic tail.  The masses
beta_{p+k} = (1/2pi) * integral of [w]_+^{p+k} follow in closed form from
the unit-disk integrals, so rescalings transform them exactly.

The 1-D solutions u(t) of -u'' = [u]_+^p lifted to the plane have infinite
mass; they are kept around as the counterexample family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp

from .emden import EmdenSolution, eval_dphi, eval_phi
from .errors import (
    MismatchedExponent,
    NonpositiveScale,
    OutOfRange,
    QuadratureFailure,
)


@dataclass(frozen=True)
class EntireSolution:
    """Radial entire solution with free boundary at |x| = R_p."""

    emden: EmdenSolution
    R_p: float
    beta_p: float

    @property
    def p(self) -> float:
        return self.emden.p

    def value_at_radius(self, r) -> np.ndarray:
        """w as a function of |x|: Emden core inside R_p, log tail outside."""
        r = np.asarray(r, dtype=float)
        amp = self.R_p ** (-2.0 / (self.p - 1.0))
        inner = r <= self.R_p
        out = np.empty_like(r)
        out[inner] = amp * eval_phi(self.emden, r[inner] / self.R_p)
        out[~inner] = amp * self.emden.dphi1 * np.log(r[~inner] / self.R_p)
        return out if out.ndim else float(out)

    def value(self, x) -> np.ndarray:
        """w at planar points, shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        return self.value_at_radius(np.hypot(x[..., 0], x[..., 1]))

    def radial_derivative(self, r: float, side: str = "auto") -> float:
        """dw/dr, one-sided at the free boundary when side is 'inner'/'outer'."""
        amp = self.R_p ** (-2.0 / (self.p - 1.0))
        if side == "inner" or (side == "auto" and r <= self.R_p):
            return amp / self.R_p * float(eval_dphi(self.emden, min(r / self.R_p, 1.0)))
        return amp * self.emden.dphi1 / r


def make_entire(emden: EmdenSolution, R_p: float, p: float | None = None) -> EntireSolution:
    """Entire solution with free-boundary radius R_p > 0."""
    if p is not None and abs(p - emden.p) > 1e-12:
        raise MismatchedExponent(f"table built for p = {emden.p}, requested {p}")
    if R_p <= 0:
        raise NonpositiveScale("free-boundary radius must be positive")
    beta_p = -emden.dphi1 / R_p ** (2.0 / (emden.p - 1.0))
    return EntireSolution(emden=emden, R_p=float(R_p), beta_p=float(beta_p))


def rescale(w: EntireSolution, t: float) -> EntireSolution:
    """Apply x -> t^{2/(p-1)} w(t x); the radius contracts to R_p / t."""
    if t <= 0:
        raise NonpositiveScale(f"scale must be positive, got {t}")
    return make_entire(w.emden, w.R_p / t)


def masses(w: EntireSolution) -> tuple[float, float, float]:
    """(beta_{p-1}, beta_p, beta_{p+1}) in closed form from the disk integrals."""
    p = w.p
    two_pi = 2.0 * np.pi
    return (
        w.emden.I_pm1 / two_pi,
        w.emden.I_p / (two_pi * w.R_p ** (2.0 / (p - 1.0))),
        w.emden.I_pp1 / (two_pi * w.R_p ** (4.0 / (p - 1.0))),
    )


def mass_by_quadrature(w: EntireSolution, k: int) -> float:
    """beta_{p+k} by direct radial quadrature of the evaluated solution."""
    p = w.p
    val, err = quad(
        lambda r: w.value_at_radius(r) ** (p + k) * r,
        0.0,
        w.R_p,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-8 * max(abs(val), 1.0):
        raise QuadratureFailure(f"mass quadrature error {err:.2e}")
    return float(val)


# ---------------------------------------------------------------------------
# one-dimensional infinite-mass family


@dataclass(frozen=True)
class OneDimSolution:
    """Even solution of -u'' = [u]_+^p with peak a, linear beyond |t| = t0."""

    p: float
    a: float
    t0: float
    angle: float
    tail_slope: float
    _dense: object = field(repr=False, compare=False)

    def u(self, t) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        core = t <= self.t0
        if np.any(core):
            out[core] = self._dense(t[core])[0]
        out[~core] = self.tail_slope * (t[~core] - self.t0)
        return out if out.ndim else float(out)

    def du(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        sgn = np.sign(t)
        ta = np.abs(t)
        out = np.empty_like(ta)
        core = ta <= self.t0
        if np.any(core):
            out[core] = self._dense(ta[core])[1]
        out[~core] = self.tail_slope
        out *= sgn
        return out if out.ndim else float(out)

    def lift(self, x1, x2) -> np.ndarray:
        """Planar lift w(x) = u(x . e_angle), an infinite-mass entire solution."""
        proj = np.asarray(x1) * np.cos(self.angle) + np.asarray(x2) * np.sin(self.angle)
        return self.u(proj)


def _t0_by_quadrature(p: float, a: float, tol: float) -> float:
    """Half-width from the first integral, singular endpoint removed by s = a - w^2."""
    q = p + 1.0

    def ratio(sigma):
        # (1 - sigma^q)/(1 - sigma) without cancellation near sigma = 1
        e = 1.0 - sigma
        if e < 1e-4:
            return q - q * (q - 1) * e / 2 + q * (q - 1) * (q - 2) * e**2 / 6
        return -np.expm1(q * np.log(sigma)) / e

    smooth, e1 = quad(
        lambda s: 1.0 / np.sqrt(a**q - s**q), 0.0, a / 2, epsabs=tol * 1e-2, epsrel=tol * 1e-2
    )
    sing, e2 = quad(
        lambda w: 2.0 / np.sqrt(a ** (q - 1) * ratio((a - w * w) / a)),
        0.0,
        np.sqrt(a / 2),
        epsabs=tol * 1e-2,
        epsrel=tol * 1e-2,
    )
    if e1 + e2 > max(tol, 1e-13) * max(smooth + sing, 1.0):
        raise QuadratureFailure(f"half-width quadrature error {e1 + e2:.2e}")
    return float(np.sqrt(q / 2.0) * (smooth + sing))


def solve_onedim(p: float, a: float, tol: float = 1e-10, angle: float = 0.0) -> OneDimSolution:
    """Solve -u'' = [u]_+^p, u(0) = a, u'(0) = 0 and attach the linear tails.

    The half-width t0 comes from the quadrature of the first integral; the
    profile itself is integrated as an ODE and the two are cross-checked.
    """
    if p <= 1:
        raise OutOfRange(f"exponent must exceed 1, got p = {p}")
    if a <= 0:
        raise OutOfRange(f"peak height must be positive, got a = {a}")
    if not 0.0 <= angle <= 2.0 * np.pi:
        raise OutOfRange("orientation angle must lie in [0, 2*pi]")

    t0 = _t0_by_quadrature(p, a, tol)

    def rhs(t, y):
        return (y[1], -max(y[0], 0.0) ** p)

    def crossing(t, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, 4.0 * t0),
        (a, 0.0),
        method="DOP853",
        rtol=max(min(tol * 1e-2, 1e-10), 1e-13),
        atol=1e-14,
        dense_output=True,
        events=crossing,
    )
    if sol.t_events[0].size == 0:
        raise QuadratureFailure("profile integration never crossed zero")
    t0_ode = float(sol.t_events[0][0])
    if abs(t0_ode - t0) > max(100 * tol, 1e-9) * t0:
        raise QuadratureFailure(
            f"half-width mismatch: quadrature {t0}, integration {t0_ode}"
        )

    tail = -np.sqrt(2.0 / (p + 1.0)) * a ** ((p + 1.0) / 2.0)
    return OneDimSolution(
        p=float(p), a=float(a), t0=t0, angle=float(angle), tail_slope=float(tail),
        _dense=sol.sol,
    )


def first_integral_residual(sol: OneDimSolution, n: int = 2001) -> float:
    """Max defect of u'^2 = 2/(p+1) (a^{p+1} - u^{p+1}) on [0, t0)."""
    t = np.linspace(0.0, sol.t0 * (1 - 1e-9), n)
    u, du = sol.u(t), sol.du(t)
    lhs = du**2
    rhs = 2.0 / (sol.p + 1.0) * (sol.a ** (sol.p + 1) - u ** (sol.p + 1))
    return float(np.abs(lhs - rhs).max())


def window_mass(sol: OneDimSolution, half_width: float, k: int = 0) -> float:
    """Integral of [lift]_+^{p+k} over the square [-L, L]^2 for angle = 0."""
    L = float(half_width)
    lim = min(sol.t0, L)
    t = np.linspace(-lim, lim, 4001)
    line = simpson(np.maximum(sol.u(t), 0.0) ** (sol.p + k), x=t)
    return float(2.0 * L * line)


def lift_residual(sol: OneDimSolution, half_width: float, h: float) -> float:
    """Max 5-point residual of -Delta(w) = [w]_+^p for the planar lift."""
    n = int(round(2 * half_width / h)) + 1
    x = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(x, x, indexing="xy")
    W = sol.lift(X, Y)
    lap = (W[1:-1, 2:] + W[1:-1, :-2] + W[2:, 1:-1] + W[:-2, 1:-1] - 4 * W[1:-1, 1:-1]) / h**2
    resid = -lap - np.maximum(W[1:-1, 1:-1], 0.0) ** sol.p
    return float(np.abs(resid).max())
