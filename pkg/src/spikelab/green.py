"""Dirichlet Green functions on the disk and rectangle, and the point-energy
of spike configurations.

Disk: closed form by the image point y* = R^2 y / |y|^2.  Rectangle: sine
series in x summed in closed form per y-image, leaving a geometrically
convergent sum over images (the slow logarithmic part of the double series
is resummed exactly, which is what makes the regular part computable on
the diagonal).  Derivatives are term-wise analytic; the acceptance suite
checks them against central differences.

The convention is G(x, y) = -(1/2pi) ln|x - y| + H(x, y) with H the
regular part, so on the unit disk H(x, 0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emden import EmdenSolution
from .errors import (
    CoincidentPoints,
    CollisionDetected,
    ConfigError,
    ExteriorPoint,
    NonConvergence,
)
from .grid import GridDomain
from .solver import GridSolution

TWO_PI = 2.0 * np.pi


class DiskGreen:
    """Green function of the disk of radius R centered at the origin."""

    method = "disk closed form"

    def __init__(self, radius: float):
        if radius <= 0:
            raise ConfigError("disk radius must be positive")
        self.R = float(radius)

    def contains(self, pt) -> bool:
        return bool(np.hypot(pt[0], pt[1]) < self.R)

    def green(self, x, y) -> np.ndarray:
        """G at points x (shape (..., 2)) for a fixed source y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if not self.contains(y):
            raise ExteriorPoint(f"source {y} outside the open disk")
        if x.ndim == 1:
            if np.hypot(x[0] - y[0], x[1] - y[1]) < 1e-14 * self.R:
                raise CoincidentPoints("green evaluated on the diagonal")
        return self._green_arr(x, y)

    def _green_arr(self, x, y) -> np.ndarray:
        d = np.hypot(x[..., 0] - y[0], x[..., 1] - y[1])
        ay = float(np.hypot(y[0], y[1]))
        with np.errstate(divide="ignore", invalid="ignore"):
            if ay < 1e-14 * self.R:
                return np.log(self.R / np.hypot(x[..., 0], x[..., 1])) / TWO_PI
            ystar = self.R**2 * y / ay**2
            dstar = np.hypot(x[..., 0] - ystar[0], x[..., 1] - ystar[1])
            return np.log(ay * dstar / (self.R * d)) / TWO_PI

    def regular_part(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ay = float(np.hypot(y[0], y[1]))
        if ay < 1e-14 * self.R:
            return np.broadcast_to(np.log(self.R) / TWO_PI, x.shape[:-1]).copy()
        ystar = self.R**2 * y / ay**2
        dstar = np.hypot(x[..., 0] - ystar[0], x[..., 1] - ystar[1])
        return np.log(ay * dstar / self.R) / TWO_PI

    def grad_green(self, x, y) -> np.ndarray:
        """Gradient in the first argument, shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ay = float(np.hypot(y[0], y[1]))
        dx = x - y
        d2 = (dx**2).sum(axis=-1)[..., None]
        if ay < 1e-14 * self.R:
            r2 = (x**2).sum(axis=-1)[..., None]
            return -x / r2 / TWO_PI
        ystar = self.R**2 * y / ay**2
        dxs = x - ystar
        ds2 = (dxs**2).sum(axis=-1)[..., None]
        return (dxs / ds2 - dx / d2) / TWO_PI

    def reg_diag(self, q) -> float:
        """H(q, q) = (1/2pi) ln((R^2 - |q|^2)/R)."""
        q = np.asarray(q, dtype=float)
        r2 = float((q**2).sum())
        if r2 >= self.R**2:
            raise ExteriorPoint("diagonal regular part outside the open disk")
        return float(np.log((self.R**2 - r2) / self.R) / TWO_PI)

    def grad_reg_diag(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        r2 = float((q**2).sum())
        return -2.0 * q / (self.R**2 - r2) / TWO_PI


class RectGreen:
    """Green function of the centered rectangle Lx x Ly.

    Internally uses corner coordinates (0, a) x (0, b).  The sum over
    y-images converges like exp(-2 pi b k / a); the truncation order is
    fixed by the tolerance alone.
    """

    method = "rectangle accelerated sine series"

    def __init__(self, Lx: float, Ly: float, tol: float = 1e-13):
        if Lx <= 0 or Ly <= 0:
            raise ConfigError("rectangle sides must be positive")
        self.a = float(Lx)
        self.b = float(Ly)
        self.images = max(3, int(np.ceil(self.a / (TWO_PI * self.b) * np.log(1.0 / tol))) + 2)

    def contains(self, pt) -> bool:
        return bool(abs(pt[0]) < self.a / 2 and abs(pt[1]) < self.b / 2)

    def _corner(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        out[..., 0] += self.a / 2
        out[..., 1] += self.b / 2
        return out

    def _T(self, rho, x1, y1):
        q = np.exp(-np.pi * rho / self.a)
        cp = np.cos(np.pi * (x1 + y1) / self.a)
        cm = np.cos(np.pi * (x1 - y1) / self.a)
        num = 1.0 - 2.0 * q * cp + q * q
        den = 1.0 - 2.0 * q * cm + q * q
        return np.log(num / den) / (4.0 * np.pi)

    def _T_drho(self, rho, x1, y1):
        q = np.exp(-np.pi * rho / self.a)
        dq = -np.pi / self.a * q
        cp = np.cos(np.pi * (x1 + y1) / self.a)
        cm = np.cos(np.pi * (x1 - y1) / self.a)
        num = 1.0 - 2.0 * q * cp + q * q
        den = 1.0 - 2.0 * q * cm + q * q
        return (dq * (2 * q - 2 * cp) / num - dq * (2 * q - 2 * cm) / den) / (4.0 * np.pi)

    def _T_dx1(self, rho, x1, y1):
        q = np.exp(-np.pi * rho / self.a)
        sp = np.sin(np.pi * (x1 + y1) / self.a)
        sm = np.sin(np.pi * (x1 - y1) / self.a)
        cp = np.cos(np.pi * (x1 + y1) / self.a)
        cm = np.cos(np.pi * (x1 - y1) / self.a)
        num = 1.0 - 2.0 * q * cp + q * q
        den = 1.0 - 2.0 * q * cm + q * q
        piA = np.pi / self.a
        return (2 * q * sp * piA / num - 2 * q * sm * piA / den) / (4.0 * np.pi)

    def green(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        yc = self._corner(y)
        if not (0 < yc[0] < self.a and 0 < yc[1] < self.b):
            raise ExteriorPoint(f"source {y} outside the open rectangle")
        if x.ndim == 1:
            if np.hypot(x[0] - y[0], x[1] - y[1]) < 1e-14 * max(self.a, self.b):
                raise CoincidentPoints("green evaluated on the diagonal")
        return self._green_arr(x, y)

    def _green_arr(self, x, y) -> np.ndarray:
        xc = self._corner(np.asarray(x, dtype=float))
        yc = self._corner(np.asarray(y, dtype=float))
        x1, x2 = xc[..., 0], xc[..., 1]
        y1, y2 = float(yc[0]), float(yc[1])
        d = np.abs(x2 - y2)
        sig = x2 + y2
        sigp = 2 * self.b - x2 - y2
        g = 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(self.images + 1):
                sh = 2 * self.b * k
                g = g + (
                    self._T(d + sh, x1, y1)
                    + self._T(2 * self.b - d + sh, x1, y1)
                    - self._T(sig + sh, x1, y1)
                    - self._T(sigp + sh, x1, y1)
                )
        return g

    def regular_part(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        scale = max(self.a, self.b)
        d = np.hypot(x[..., 0] - y[0], x[..., 1] - y[1])
        if x.ndim == 1:
            if d < 1e-7 * scale:
                return float(self.reg_diag(0.5 * (x + y)))
            return float(self._green_arr(x, y) + np.log(d) / TWO_PI)
        if np.any(d < 1e-7 * scale):
            raise CoincidentPoints("regular part array evaluation too close to the diagonal")
        return self._green_arr(x, y) + np.log(d) / TWO_PI

    def grad_green(self, x, y) -> np.ndarray:
        xc = self._corner(x)
        yc = self._corner(np.asarray(y, dtype=float))
        x1, x2 = xc[..., 0], xc[..., 1]
        y1, y2 = float(yc[0]), float(yc[1])
        d = np.abs(x2 - y2)
        sgn = np.sign(x2 - y2)
        sig = x2 + y2
        sigp = 2 * self.b - x2 - y2
        gx = 0.0
        gy = 0.0
        for k in range(self.images + 1):
            sh = 2 * self.b * k
            gx = gx + (
                self._T_dx1(d + sh, x1, y1)
                + self._T_dx1(2 * self.b - d + sh, x1, y1)
                - self._T_dx1(sig + sh, x1, y1)
                - self._T_dx1(sigp + sh, x1, y1)
            )
            gy = gy + (
                sgn * self._T_drho(d + sh, x1, y1)
                - sgn * self._T_drho(2 * self.b - d + sh, x1, y1)
                - self._T_drho(sig + sh, x1, y1)
                + self._T_drho(sigp + sh, x1, y1)
            )
        return np.stack([gx, gy], axis=-1)

    def reg_diag(self, q) -> float:
        qc = self._corner(np.asarray(q, dtype=float))
        u, w = float(qc[0]), float(qc[1])
        if not (0 < u < self.a and 0 < w < self.b):
            raise ExteriorPoint("diagonal regular part outside the open rectangle")
        C = np.cos(TWO_PI * u / self.a)
        out = np.log(2.0 - 2.0 * C) / (4.0 * np.pi) - np.log(np.pi / self.a) / TWO_PI

        def tdiag(rho):
            Q = np.exp(-np.pi * rho / self.a)
            return (np.log(1 - 2 * Q * C + Q * Q) - 2 * np.log(1 - Q)) / (4.0 * np.pi)

        for k in range(1, self.images + 1):
            out += 2.0 * tdiag(2 * self.b * k)
        for k in range(self.images + 1):
            out -= tdiag(2 * w + 2 * self.b * k) + tdiag(2 * (self.b - w) + 2 * self.b * k)
        return float(out)

    def grad_reg_diag(self, q) -> np.ndarray:
        qc = self._corner(np.asarray(q, dtype=float))
        u, w = float(qc[0]), float(qc[1])
        C = np.cos(TWO_PI * u / self.a)
        dC = -TWO_PI / self.a * np.sin(TWO_PI * u / self.a)
        du = -dC / (1.0 - C) / (4.0 * np.pi)
        dw = 0.0

        def tdiag_dC(rho):
            Q = np.exp(-np.pi * rho / self.a)
            return (-2 * Q) / (1 - 2 * Q * C + Q * Q) / (4.0 * np.pi)

        def tdiag_drho(rho):
            Q = np.exp(-np.pi * rho / self.a)
            dQ = -np.pi / self.a * Q
            return (dQ * (2 * Q - 2 * C) / (1 - 2 * Q * C + Q * Q)
                    + 2 * dQ / (1 - Q)) / (4.0 * np.pi)

        for k in range(1, self.images + 1):
            du += 2.0 * tdiag_dC(2 * self.b * k) * dC
        for k in range(self.images + 1):
            du -= (tdiag_dC(2 * w + 2 * self.b * k)
                   + tdiag_dC(2 * (self.b - w) + 2 * self.b * k)) * dC
            dw -= 2.0 * tdiag_drho(2 * w + 2 * self.b * k) \
                - 2.0 * tdiag_drho(2 * (self.b - w) + 2 * self.b * k)
        return np.array([du, dw])


def green_fn(domain) -> DiskGreen | RectGreen:
    """Green function for a GridDomain or a ('disk'|'rect', dims) descriptor."""
    if isinstance(domain, GridDomain):
        if domain.shape == "disk":
            return DiskGreen(domain.radius)
        return RectGreen(domain.Lx, domain.Ly)
    kind, dims = domain
    if kind == "disk":
        return DiskGreen(dims[0])
    if kind == "rect":
        return RectGreen(dims[0], dims[1])
    raise ConfigError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Kirchhoff-Routh energy of weighted point configurations


@dataclass(frozen=True)
class KRConfig:
    """Interior points with nonnegative weights."""

    points: np.ndarray  # (m, 2)
    masses: np.ndarray  # (m,)

    @staticmethod
    def of(points, masses=None) -> "KRConfig":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ms = np.ones(len(pts)) if masses is None else np.asarray(masses, dtype=float)
        if len(ms) != len(pts):
            raise ConfigError("one mass per point required")
        if np.any(ms < 0):
            raise ConfigError("masses must be nonnegative")
        return KRConfig(points=pts, masses=ms)


def _validate(gf, cfg: KRConfig, min_dist: float = 0.0) -> None:
    for i, pt in enumerate(cfg.points):
        if not gf.contains(pt):
            raise ExteriorPoint(f"point {i} at {pt} not interior")
    m = len(cfg.points)
    for i in range(m):
        for j in range(i + 1, m):
            d = float(np.hypot(*(cfg.points[i] - cfg.points[j])))
            if d <= min_dist or d == 0.0:
                raise CollisionDetected(f"points {i} and {j} at distance {d:.3e}")


def kr_hamiltonian(gf, cfg: KRConfig) -> float:
    """Sum of M_i^2 H(q_i, q_i) and the pairwise M_i M_j G(q_i, q_j) terms."""
    _validate(gf, cfg)
    pts, ms = cfg.points, cfg.masses
    total = 0.0
    for i, q in enumerate(pts):
        total += ms[i] ** 2 * gf.reg_diag(q)
    for i in range(len(pts)):
        for j in range(len(pts)):
            if i != j:
                total += ms[i] * ms[j] * float(gf.green(pts[i], pts[j]))
    return float(total)


def kr_gradient(gf, cfg: KRConfig) -> np.ndarray:
    """Gradient with respect to each point, shape (m, 2)."""
    _validate(gf, cfg)
    pts, ms = cfg.points, cfg.masses
    grad = np.zeros_like(pts)
    for i, q in enumerate(pts):
        grad[i] = ms[i] ** 2 * gf.grad_reg_diag(q)
        for j, y in enumerate(pts):
            if j != i:
                grad[i] += 2.0 * ms[i] * ms[j] * gf.grad_green(q, y)
    return grad


def kr_critical(
    gf,
    cfg0: KRConfig,
    tol: float = 1e-10,
    max_iter: int = 200,
    min_dist: float = 1e-3,
) -> KRConfig:
    """Damped Newton (finite-difference Hessian) to a zero of the gradient.

    Steps are clipped so points stay interior; a collision or boundary
    escape is a hard error, not a penalty.
    """
    pts = cfg0.points.copy()
    ms = cfg0.masses.copy()
    m = len(pts)
    fd = 1e-6

    def gradvec(flat):
        c = KRConfig(points=flat.reshape(m, 2), masses=ms)
        return kr_gradient(gf, c).ravel()

    x = pts.ravel()
    for _ in range(max_iter):
        g = gradvec(x)
        if np.linalg.norm(g, np.inf) < tol:
            return KRConfig(points=x.reshape(m, 2), masses=ms)
        n = x.size
        Hm = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = fd
            Hm[:, k] = (gradvec(x + e) - gradvec(x - e)) / (2 * fd)
        Hm = 0.5 * (Hm + Hm.T)
        try:
            step = np.linalg.solve(Hm, -g)
        except np.linalg.LinAlgError:
            step = -g
        # clip so every point stays interior and separated
        for cut in range(40):
            trial = (x + step).reshape(m, 2)
            ok = all(gf.contains(ptn) for ptn in trial)
            if ok and m > 1:
                dmin = min(
                    float(np.hypot(*(trial[i] - trial[j])))
                    for i in range(m) for j in range(i + 1, m)
                )
                ok = dmin > min_dist
            if ok:
                break
            step *= 0.5
        else:
            raise CollisionDetected("step clipping exhausted near boundary or collision")
        x = x + step
    raise NonConvergence(
        f"critical search stalled with |grad| = {np.linalg.norm(gradvec(x), np.inf):.3e}",
        diagnostics={"points": x.reshape(m, 2)},
    )


# ---------------------------------------------------------------------------
# far-field comparison against the Green representation


def far_field_check(
    sol: GridSolution,
    spikes,
    emden: EmdenSolution,
    radii=(0.15, 0.2, 0.3),
) -> dict:
    """Compare theta * v with I_p sum_i t_i^{-2/(p-1)} G(., x_i) away from spikes.

    Deviations are normalized by the sup of the Green prediction over the
    comparison set; rows are keyed by the exclusion radius r.
    """
    gf = green_fn(sol.domain)
    X, Y = sol.domain.nodes()
    pts = np.stack([X, Y], axis=-1)
    pred = np.zeros_like(X)
    ex = 2.0 / (sol.p - 1.0)
    for rec in spikes:
        mask_self = np.hypot(X - rec.x[0], Y - rec.x[1]) < 1e-12
        g = gf._green_arr(pts, np.asarray(rec.x))
        g = np.where(mask_self, 0.0, g)
        pred += emden.I_p * rec.t ** (-ex) * g
    theta_v = sol.theta * sol.v
    rows = {}
    for r in radii:
        keep = sol.domain.interior.copy()
        for rec in spikes:
            keep &= np.hypot(X - rec.x[0], Y - rec.x[1]) >= r
        if not keep.any():
            rows[float(r)] = {"n_points": 0, "note": "empty comparison set"}
            continue
        dev = np.abs(theta_v - pred)[keep]
        scale = float(np.abs(pred[keep]).max())
        rows[float(r)] = {
            "n_points": int(keep.sum()),
            "sup_rel": float(dev.max() / scale),
            "mean_rel": float(dev.mean() / scale),
            "scale": scale,
        }
    return rows
