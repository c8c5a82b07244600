"""Calibration of the core radius s and amplification theta from epsilon.

The matching radius s solves

    (eps / s)^{2/(p-1)} * phi'(1) * ln(sqrt(pi) * s) = jump

on (0, 1/sqrt(pi)); theta = phi'(1) * ln(sqrt(pi) * s) is then positive.
The same equation with a general outer radius R (jump measured against
ln(s / R)) positions model profiles on disks of any size, so the solver
below is shared by the model-profile builder (jump = a - b) and by the
rescaling machinery (jump = 1).

The left side, restricted to s below the outer radius, is a product of two
positive strictly decreasing factors, so a verified bracket plus bisection
in log s is unconditionally safe.  The scan still walks from the small-s
end and takes the first sign change, which selects the smallest root if
discretization ever produces several.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoRootInRange, OutOfRange

SQRT_PI = float(np.sqrt(np.pi))


@dataclass(frozen=True)
class ScaleParams:
    """Calibrated (eps, s, theta) triple for one perturbation strength."""

    eps: float
    s: float
    theta: float
    dphi1: float
    p: float
    residual: float

    @property
    def st_identity_defect(self) -> float:
        """Defect of eps^2 = s^2 / theta^{p-1}; zero at the exact root."""
        return abs(self.eps**2 - self.s**2 / self.theta ** (self.p - 1.0))


def _log_root(eps: float, dphi1: float, p: float, jump: float, outer: float,
              tol: float) -> float:
    """Bisection in log s for (eps/s)^{2/(p-1)} dphi1 ln(s/outer) = jump."""

    def g(ls: float) -> float:
        # log of the positive left side minus log(jump)
        s = np.exp(ls)
        theta = dphi1 * np.log(s / outer)
        if theta <= 0.0:
            return -np.inf
        return (2.0 / (p - 1.0)) * (np.log(eps) - ls) + np.log(theta) - np.log(jump)

    hi = np.log(outer) - 1e-14
    lo = min(np.log(eps), hi - 1.0)
    for _ in range(200):
        if g(lo) > 0.0:
            break
        lo -= 8.0
        if lo < -720.0:
            raise NoRootInRange(
                f"no bracket: g({np.exp(lo):.3e}) <= 0 and g({np.exp(hi):.3e}) = {g(hi):.3e}"
            )
    if g(hi) > 0.0:
        raise NoRootInRange(
            f"left side exceeds the jump at the outer radius: g = {g(hi):.3e} "
            f"(eps = {eps:.3e} not in the asymptotic regime)"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return float(np.exp(0.5 * (lo + hi)))


def solve_scale(
    eps: float,
    dphi1: float,
    p: float,
    tol: float = 1e-12,
    jump: float = 1.0,
    outer_radius: float = 1.0 / SQRT_PI,
) -> ScaleParams:
    """Solve for the core radius s and amplification theta at given eps."""
    if eps <= 0:
        raise OutOfRange(f"eps must be positive, got {eps}")
    if dphi1 >= 0:
        raise OutOfRange("boundary slope phi'(1) must be negative")
    if p <= 1:
        raise OutOfRange(f"exponent must exceed 1, got {p}")
    if jump <= 0:
        raise OutOfRange(f"level jump must be positive, got {jump}")

    s = _log_root(eps, dphi1, p, jump, outer_radius, tol)
    theta = dphi1 * np.log(s / outer_radius)
    residual = abs((eps / s) ** (2.0 / (p - 1.0)) * theta - jump)
    if residual > max(tol, 1e-9) * jump:
        raise NoRootInRange(f"root residual {residual:.3e} above tolerance")
    return ScaleParams(
        eps=float(eps), s=s, theta=float(theta), dphi1=float(dphi1), p=float(p),
        residual=float(residual),
    )


def scale_sweep(eps_list, dphi1: float, p: float, tol: float = 1e-12) -> list[ScaleParams]:
    """Calibrate a list of eps values (any order preserved)."""
    return [solve_scale(e, dphi1, p, tol) for e in eps_list]
