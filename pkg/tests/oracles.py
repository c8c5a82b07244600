"""Independent oracles used to freeze expected values.

The shooting oracle is a fixed-step classic RK4 with cubic-Hermite zero
location and step-halving Richardson extrapolation.  It shares no code
with the package (which integrates with DOP853), so agreement is a real
cross-check.  Run this file directly to print reference values.
"""

import numpy as np
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicHermiteSpline


def _rk4_trajectory(p, h, r_max=8.0, h0=1e-8):
    r = h0
    u = 1.0 - r * r / 4.0 + p * r**4 / 64.0
    du = -r / 2.0 + p * r**3 / 16.0

    def f(r, u, du):
        return du, -du / r - max(u, 0.0) ** p

    rs, us, dus = [r], [u], [du]
    while r < r_max and u > -0.2:
        k1u, k1d = f(r, u, du)
        k2u, k2d = f(r + h / 2, u + h / 2 * k1u, du + h / 2 * k1d)
        k3u, k3d = f(r + h / 2, u + h / 2 * k2u, du + h / 2 * k2d)
        k4u, k4d = f(r + h, u + h * k3u, du + h * k3d)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        r += h
        rs.append(r)
        us.append(u)
        dus.append(du)
    return np.array(rs), np.array(us), np.array(dus)


def _first_zero(rs, us, dus):
    k = int(np.argmax(us < 0))
    spline = CubicHermiteSpline(rs[k - 1 : k + 1], us[k - 1 : k + 1], dus[k - 1 : k + 1])
    a, b = rs[k - 1], rs[k]
    for _ in range(200):
        m = 0.5 * (a + b)
        if spline(a) * spline(m) <= 0:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def emden_oracle(p, h=2e-4):
    """Reference (phi0, dphi1, I_pm1, I_p, I_pp1) by RK4 + Richardson."""
    out = []
    trajectories = {}
    for step in (h, h / 2):
        rs, us, dus = _rk4_trajectory(p, step)
        r0 = _first_zero(rs, us, dus)
        spline = CubicHermiteSpline(rs, us, dus)
        out.append((r0, float(spline.derivative()(r0))))
        trajectories[step] = (rs, us, dus)
    (r0a, da), (r0b, db) = out
    r0 = (16 * r0b - r0a) / 15
    dur0 = (16 * db - da) / 15

    phi0 = r0 ** (2 / (p - 1))
    dphi1 = r0 ** ((p + 1) / (p - 1)) * dur0

    rs, us, dus = trajectories[h / 2]
    spline = CubicHermiteSpline(rs, us, dus)
    r = np.linspace(0, 1, 40_001)
    phi = phi0 * np.clip(spline(r0 * r), 0, None)
    masses = [2 * np.pi * simpson(phi ** (p + k) * r, x=r) for k in (-1, 0, 1)]
    return phi0, dphi1, masses[0], masses[1], masses[2]


def emden_phi_oracle(p, radii, h=1e-4):
    """Reference phi values at given radii from the RK4 trajectory."""
    rs, us, dus = _rk4_trajectory(p, h)
    r0 = _first_zero(rs, us, dus)
    spline = CubicHermiteSpline(rs, us, dus)
    return r0 ** (2 / (p - 1)) * np.clip(spline(r0 * np.asarray(radii)), 0, None)


def onedim_t0_oracle(p, a):
    """Half-width of the positive part by adaptive quadrature.

    The endpoint singularity at s = a is removed by s = a - w^2 before
    handing the smooth integrand to Gauss-Kronrod.
    """
    q = p + 1

    def ratio(sigma):
        # (1 - sigma^q) / (1 - sigma), stable near sigma = 1
        sigma = np.asarray(sigma, dtype=float)
        e = 1.0 - sigma
        direct = -np.expm1(q * np.log(np.maximum(sigma, 1e-300))) / np.where(e == 0, 1, e)
        taylor = q - q * (q - 1) * e / 2 + q * (q - 1) * (q - 2) * e**2 / 6
        return np.where(e < 1e-4, taylor, direct)

    smooth, _ = quad(lambda s: 1.0 / np.sqrt(a**q - s**q), 0.0, a / 2, epsabs=1e-14, epsrel=1e-13)
    sing, _ = quad(
        lambda w: 2.0 / np.sqrt(ratio((a - w * w) / a) * a**q / a),
        0.0,
        np.sqrt(a / 2),
        epsabs=1e-14,
        epsrel=1e-13,
    )
    return np.sqrt(q / 2.0) * (smooth + sing)


if __name__ == "__main__":
    for p in (1.5, 2.0, 3.0, 5.0):
        vals = emden_oracle(p)
        print(f"p={p}: phi0={vals[0]:.12f} dphi1={vals[1]:.12f} "
              f"I_pm1={vals[2]:.12f} I_p={vals[3]:.12f} I_pp1={vals[4]:.12f}")
    print("phi(p=2) at [0.25, 0.5, 0.75]:", emden_phi_oracle(2.0, [0.25, 0.5, 0.75]))
    print("t0(p=3, a=1) =", onedim_t0_oracle(3.0, 1.0))
    print("t0(p=2, a=2) =", onedim_t0_oracle(2.0, 2.0))
