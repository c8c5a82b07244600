"""Masked Cartesian grids on disks and rectangles, centered at the origin.

Node (i, j) sits at (x0 + j h, y0 + i h) with x0 = -(nx-1) h / 2 and
y0 = -(ny-1) h / 2.  "Interior" marks the unknowns of the Dirichlet
problem; everything else carries the boundary value zero.  On the disk the
negative Laplacian uses Shortley-Weller corrections: boundary arms are
shortened to the circle, which keeps second-order global accuracy on the
curved boundary.

Field dumps: 32-byte header (magic "PSLB", nx u32, ny u32, h f64, eps f64,
p f32) followed by ny*nx float64 row-major node values; nodes outside the
closed domain hold NaN.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, OutOfDomain

MAGIC = b"PSLB"
HEADER = struct.Struct("<4sIIddf")
assert HEADER.size == 32

# arms shorter than this fraction of h are clamped; the node is then pinned
# to the nearby boundary value through a stiff but well-posed row
MIN_ARM = 1e-8


@dataclass(frozen=True)
class GridDomain:
    """Uniform grid with an interior mask over a disk or rectangle."""

    shape: str
    nx: int
    ny: int
    h: float
    interior: np.ndarray = field(repr=False)
    radius: float = 0.0
    Lx: float = 0.0
    Ly: float = 0.0

    @property
    def x0(self) -> float:
        return -(self.nx - 1) * self.h / 2.0

    @property
    def y0(self) -> float:
        return -(self.ny - 1) * self.h / 2.0

    @property
    def n_interior(self) -> int:
        return int(self.interior.sum())

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Full coordinate arrays X, Y of shape (ny, nx)."""
        x = self.x0 + self.h * np.arange(self.nx)
        y = self.y0 + self.h * np.arange(self.ny)
        return np.meshgrid(x, y, indexing="xy")

    def inside_closure(self) -> np.ndarray:
        """Nodes lying in the closed domain (interior plus boundary band)."""
        X, Y = self.nodes()
        if self.shape == "disk":
            return X**2 + Y**2 <= self.radius**2 * (1 + 1e-12)
        return (np.abs(X) <= self.Lx / 2 + 1e-12) & (np.abs(Y) <= self.Ly / 2 + 1e-12)

    def boundary_distance(self, x: float, y: float) -> float:
        if self.shape == "disk":
            return self.radius - float(np.hypot(x, y))
        return float(min(self.Lx / 2 - abs(x), self.Ly / 2 - abs(y)))


def disk_domain(radius: float, n: int) -> GridDomain:
    """Disk of given radius on an n x n grid over its bounding box."""
    if n < 5 or radius <= 0:
        raise ConfigError("disk grid needs n >= 5 and a positive radius")
    h = 2.0 * radius / (n - 1)
    x = -radius + h * np.arange(n)
    X, Y = np.meshgrid(x, x, indexing="xy")
    interior = X**2 + Y**2 < radius**2 * (1 - 1e-14)
    return GridDomain(shape="disk", nx=n, ny=n, h=h, interior=interior, radius=radius)


def rect_domain(Lx: float, Ly: float, n: int) -> GridDomain:
    """Rectangle Lx x Ly with n nodes along x; Ly must be grid-commensurate."""
    if n < 5 or Lx <= 0 or Ly <= 0:
        raise ConfigError("rectangle grid needs n >= 5 and positive sides")
    h = Lx / (n - 1)
    my = Ly / h
    ny = int(round(my)) + 1
    if abs(my - round(my)) > 1e-9:
        raise ConfigError(f"Ly = {Ly} is not a multiple of h = {h}")
    x = -Lx / 2 + h * np.arange(n)
    y = -Ly / 2 + h * np.arange(ny)
    X, Y = np.meshgrid(x, y, indexing="xy")
    interior = (np.abs(X) < Lx / 2 - h / 2) & (np.abs(Y) < Ly / 2 - h / 2)
    return GridDomain(shape="rect", nx=n, ny=ny, h=h, interior=interior, Lx=Lx, Ly=Ly)


def index_map(domain: GridDomain) -> np.ndarray:
    """(ny, nx) array of unknown indices, -1 outside the interior."""
    idx = -np.ones((domain.ny, domain.nx), dtype=np.int64)
    idx[domain.interior] = np.arange(domain.n_interior)
    return idx


def neg_laplacian(domain: GridDomain) -> sp.csc_matrix:
    """Matrix of -Laplacian on the interior unknowns (Dirichlet zero)."""
    if domain.shape == "rect":
        return _neg_laplacian_rect(domain)
    return _neg_laplacian_disk(domain)


def _neg_laplacian_rect(domain: GridDomain) -> sp.csc_matrix:
    idx = index_map(domain)
    h2 = domain.h**2
    n = domain.n_interior
    I, J = np.where(domain.interior)
    rows, cols, vals = [], [], []
    for di, dj in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        ni, nj = I + di, J + dj
        ok = (ni >= 0) & (ni < domain.ny) & (nj >= 0) & (nj < domain.nx)
        ok[ok] &= domain.interior[ni[ok], nj[ok]]
        rows.append(idx[I[ok], J[ok]])
        cols.append(idx[ni[ok], nj[ok]])
        vals.append(np.full(int(ok.sum()), -1.0 / h2))
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(np.full(n, 4.0 / h2))
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def _neg_laplacian_disk(domain: GridDomain) -> sp.csc_matrix:
    idx = index_map(domain)
    h, R = domain.h, domain.radius
    X, Y = domain.nodes()
    I, J = np.where(domain.interior)
    xc, yc = X[I, J], Y[I, J]
    n = domain.n_interior

    arms = {}
    for name, (di, dj) in (("E", (0, 1)), ("W", (0, -1)), ("N", (1, 0)), ("S", (-1, 0))):
        ni, nj = I + di, J + dj
        inb = (ni >= 0) & (ni < domain.ny) & (nj >= 0) & (nj < domain.nx)
        nbr_interior = np.zeros_like(inb)
        nbr_interior[inb] = domain.interior[ni[inb], nj[inb]]
        if name in ("E", "W"):
            gap = np.sqrt(np.maximum(R**2 - yc**2, 0.0)) + (-xc if name == "E" else xc)
        else:
            gap = np.sqrt(np.maximum(R**2 - xc**2, 0.0)) + (-yc if name == "N" else yc)
        length = np.where(nbr_interior, h, np.clip(gap, MIN_ARM * h, h))
        nbr_idx = np.where(nbr_interior, idx[ni % domain.ny, nj % domain.nx], -1)
        arms[name] = (length, nbr_idx)

    hE, iE = arms["E"]
    hW, iW = arms["W"]
    hN, iN = arms["N"]
    hS, iS = arms["S"]

    diag = 2.0 / (hE * hW) + 2.0 / (hN * hS)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [diag]
    for length, other, nbr in ((hE, hW, iE), (hW, hE, iW), (hN, hS, iN), (hS, hN, iS)):
        ok = nbr >= 0
        rows.append(np.arange(n)[ok])
        cols.append(nbr[ok])
        vals.append(-2.0 / (length[ok] * (length[ok] + other[ok])))
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def integrate(domain: GridDomain, values: np.ndarray) -> float:
    """Node-weight quadrature h^2 * sum over interior nodes."""
    return float(values[domain.interior].sum() * domain.h**2)


def bilinear(domain: GridDomain, V: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of a full-grid field at points (px, py)."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    gx = (px - domain.x0) / domain.h
    gy = (py - domain.y0) / domain.h
    if np.any(gx < -1e-9) or np.any(gx > domain.nx - 1 + 1e-9) \
            or np.any(gy < -1e-9) or np.any(gy > domain.ny - 1 + 1e-9):
        raise OutOfDomain("interpolation point outside the grid")
    j0 = np.clip(np.floor(gx).astype(int), 0, domain.nx - 2)
    i0 = np.clip(np.floor(gy).astype(int), 0, domain.ny - 2)
    tx = gx - j0
    ty = gy - i0
    return (
        V[i0, j0] * (1 - tx) * (1 - ty)
        + V[i0, j0 + 1] * tx * (1 - ty)
        + V[i0 + 1, j0] * (1 - tx) * ty
        + V[i0 + 1, j0 + 1] * tx * ty
    )


def restrict_to(domain_from: GridDomain, V: np.ndarray, domain_to: GridDomain) -> np.ndarray:
    """Resample a field onto another grid of the same domain (warm starts)."""
    X, Y = domain_to.nodes()
    out = np.zeros((domain_to.ny, domain_to.nx))
    out[domain_to.interior] = bilinear(
        domain_from, V, X[domain_to.interior], Y[domain_to.interior]
    )
    return out


# ---------------------------------------------------------------------------
# field dumps


def write_field(path, domain: GridDomain, V: np.ndarray, eps: float, p: float) -> None:
    """Binary dump: 32-byte header then row-major float64 node values."""
    data = np.array(V, dtype="<f8")
    data[~domain.inside_closure()] = np.nan
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, domain.nx, domain.ny, domain.h, eps, p))
        f.write(data.tobytes(order="C"))


def read_field(path) -> tuple[GridDomain, np.ndarray, float, float]:
    """Read a binary dump; returns (domain, values, eps, p)."""
    with open(path, "rb") as f:
        magic, nx, ny, h, eps, p = HEADER.unpack(f.read(HEADER.size))
        if magic != MAGIC:
            raise ConfigError(f"bad field magic {magic!r}")
        data = np.frombuffer(f.read(8 * nx * ny), dtype="<f8").reshape(ny, nx).copy()
    if np.isnan(data).any():
        radius = (nx - 1) * h / 2.0
        domain = disk_domain(radius, nx)
    else:
        domain = rect_domain((nx - 1) * h, (ny - 1) * h, nx)
    values = np.where(np.isnan(data), 0.0, data)
    return domain, values, float(eps), float(p)


def write_field_csv(path, domain: GridDomain, V: np.ndarray) -> None:
    """CSV dump x,y,v over nodes of the closed domain."""
    X, Y = domain.nodes()
    keep = domain.inside_closure()
    with open(path, "w") as f:
        f.write("x,y,v\n")
        for x, y, v in zip(X[keep], Y[keep], V[keep]):
            f.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")
