"""Single-spike model profiles on the disk of unit area.

A profile U has an Emden core of radius s inside which U > a, glued C1 at
|x| = s to a logarithmic shell that decays to the boundary level b at
|x| = R2 = 1/sqrt(pi).  The matching radius solves the same transcendental
equation as the scale calibration, with the level jump a - b on the right
side.  All weighted masses of [U - a]_+ reduce to disk integrals of the
Emden profile in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .emden import EmdenSolution, eval_dphi, eval_phi
from .errors import ExponentOutOfRange, InvalidLevels, QuadratureFailure
from .scales import SQRT_PI, solve_scale

R2 = 1.0 / SQRT_PI


@dataclass(frozen=True)
class DYProfile:
    """Piecewise profile: Emden core over a logarithmic harmonic shell."""

    emden: EmdenSolution
    p: float
    a: float
    b: float
    eps: float
    s_eps: float
    amp: float  # (eps / s_eps)^{2/(p-1)}, the core amplitude

    @property
    def R2(self) -> float:
        return R2

    @property
    def theta(self) -> float:
        """Amplification factor phi'(1) ln(sqrt(pi) s_eps) > 0."""
        return self.emden.dphi1 * np.log(SQRT_PI * self.s_eps)

    @property
    def peak(self) -> float:
        return self.a + self.amp * self.emden.phi0

    def value_at_radius(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        core = r <= self.s_eps
        out[core] = self.a + self.amp * eval_phi(self.emden, r[core] / self.s_eps)
        shell = ~core
        out[shell] = self.a + (self.a - self.b) * (
            np.log(r[shell] / self.s_eps) / np.log(SQRT_PI * self.s_eps)
        )
        return out if out.ndim else float(out)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.value_at_radius(np.hypot(x[..., 0], x[..., 1]))

    def one_sided_slopes(self) -> tuple[float, float]:
        """Radial derivatives at the matching circle (core side, shell side)."""
        inner = self.amp * float(eval_dphi(self.emden, 1.0)) / self.s_eps
        outer = (self.a - self.b) / (self.s_eps * np.log(SQRT_PI * self.s_eps))
        return inner, outer

    def rescaled_core_distance(self, radius: float = 1.0, n: int = 512) -> float:
        """Sup distance between the refined rescaling of U and its limit shape.

        The refined rescaling theta * (U(s y) - a) equals (a - b) * w*(y)
        identically, so the returned value is pure floating-point noise;
        the radius may reach R2 / s_eps.
        """
        y = np.linspace(0.0, min(radius, R2 / self.s_eps * (1 - 1e-12)), n)
        tilde = self.theta * (self.value_at_radius(self.s_eps * y) - self.a)
        wstar = np.where(
            y <= 1.0,
            eval_phi(self.emden, np.clip(y, 0, 1)),
            self.emden.dphi1 * np.log(np.maximum(y, 1e-300)),
        )
        return float(np.abs(tilde - (self.a - self.b) * wstar).max())


@dataclass(frozen=True)
class ConstraintParameters:
    """Back-mapped parameters of the constrained formulations."""

    alpha_abs: float
    lam: float
    s_closed_form: float


def build_profile(
    emden: EmdenSolution, eps: float, a: float = 1.0, b: float = 0.0,
    tol: float = 1e-12,
) -> DYProfile:
    """Construct the profile at perturbation eps with levels b <= a."""
    if b > a:
        raise InvalidLevels(f"boundary level {b} exceeds plasma level {a}")
    if a == b:
        raise InvalidLevels("zero level jump: the profile degenerates to U = a")
    sc = solve_scale(eps, emden.dphi1, emden.p, tol=tol, jump=a - b)
    amp = (eps / sc.s) ** (2.0 / (emden.p - 1.0))
    return DYProfile(
        emden=emden, p=emden.p, a=float(a), b=float(b), eps=float(eps),
        s_eps=sc.s, amp=float(amp),
    )


def profile_masses(prof: DYProfile, t: float) -> float:
    """Integral of (1/eps^2) ([U - a]_+^p)^t over the disk, in closed form.

    Equals A^{p(t-1)+1} I_{pt} with A the core amplitude; t = (p-1)/p gives
    the eps-independent value I_{p-1}, t = 1 the decaying p-mass.
    """
    p = prof.p
    if t < (p - 1.0) / p:
        raise ExponentOutOfRange(f"t = {t} below (p-1)/p = {(p - 1) / p}")
    ipt = prof.emden.mass_integral(p * t)
    return float(prof.amp ** (p * (t - 1.0) + 1.0) * ipt)


def mass_by_quadrature(prof: DYProfile, k: int, rtol: float = 1e-11) -> float:
    """(1/eps^2) * integral of [U - a]_+^{p+k}, by adaptive radial quadrature.

    Samples the interpolated profile directly, so it is an independent check
    of the closed forms above.
    """
    q = prof.p + k

    def f(r):
        return max(prof.value_at_radius(r) - prof.a, 0.0) ** q * r

    val, err = quad(f, 0.0, prof.s_eps, epsabs=0.0, epsrel=rtol, limit=200)
    if err > 1e-7 * max(abs(val), 1e-300):
        raise QuadratureFailure(f"profile mass quadrature error {err:.2e}")
    return float(2.0 * np.pi * val / prof.eps**2)


def constraint_parameters(prof: DYProfile) -> ConstraintParameters:
    """Recover |alpha| and lambda from the profile's integral constraint.

    Uses the physical normalization a = 1, b = 0.  The closed-form matching
    radius eps^p |alpha|^{p(p-1)/2} I_p^{(p-1)/2} is returned for
    cross-checking against the root-solved s_eps, never substituted for it.
    """
    if prof.a != 1.0 or prof.b != 0.0:
        raise InvalidLevels("constraint parameters are defined for a = 1, b = 0")
    p, ip = prof.p, prof.emden.I_p
    p_mass_total = prof.eps**2 * prof.amp * ip  # integral of [U - 1]_+^p
    alpha_abs = p_mass_total ** (-1.0 / p)
    lam = 1.0 / (prof.eps**2 * alpha_abs ** (p - 1.0))
    s_closed = prof.eps**p * alpha_abs ** (p * (p - 1.0) / 2.0) * ip ** ((p - 1.0) / 2.0)
    return ConstraintParameters(alpha_abs=float(alpha_abs), lam=float(lam),
                                s_closed_form=float(s_closed))


def radial_residual(prof: DYProfile, n: int = 4001) -> float:
    """Max relative defect of -Delta U = (1/eps^2) [U - a]_+^p on a radial grid.

    Centered differences on a uniform grid over (0, R2); collars of width
    3h around r = 0 and the matching circle are excluded (U'' jumps across
    the free boundary, and the axis term needs the symmetric limit).
    """
    r = np.linspace(0.0, R2, n)
    h = r[1] - r[0]
    U = prof.value_at_radius(r)
    i = np.arange(1, n - 1)
    lap = (U[i + 1] - 2 * U[i] + U[i - 1]) / h**2 + (U[i + 1] - U[i - 1]) / (2 * h * r[i])
    src = np.maximum(U[i] - prof.a, 0.0) ** prof.p / prof.eps**2
    resid = np.abs(-lap - src)
    keep = (r[i] > 3 * h) & (np.abs(r[i] - prof.s_eps) > 3 * h)
    scale = src.max()
    return float(resid[keep].max() / scale)
