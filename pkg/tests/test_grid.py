import numpy as np
import pytest

from spikelab.errors import ConfigError, OutOfDomain
from spikelab.grid import (
    bilinear,
    disk_domain,
    integrate,
    neg_laplacian,
    read_field,
    rect_domain,
    restrict_to,
    write_field,
    write_field_csv,
)


def test_disk_mask_symmetry():
    dom = disk_domain(1.0, 41)
    m = dom.interior
    assert np.array_equal(m, m[::-1, :])
    assert np.array_equal(m, m[:, ::-1])
    assert np.array_equal(m, m.T)
    assert m[20, 20]
    assert not m[0, 0]


def test_rect_commensurate():
    dom = rect_domain(2.0, 1.0, 41)
    assert dom.ny == 21
    assert dom.h == pytest.approx(0.05)
    with pytest.raises(ConfigError):
        rect_domain(2.0, 1.03, 41)


def test_disk_laplacian_exact_on_quadratic():
    # u = R^2 - x^2 - y^2 vanishes on the circle and -Lap u = 4; the
    # Shortley-Weller stencil is exact on separable quadratics
    dom = disk_domain(0.8, 61)
    X, Y = dom.nodes()
    u = (0.8**2 - X**2 - Y**2)[dom.interior]
    L = neg_laplacian(dom)
    assert np.abs(L @ u - 4.0).max() < 1e-9


def test_disk_poisson_second_order():
    # u = x^2 (R^2 - r^2) on the disk, -Lap u = 14 x^2 + 2 y^2 - 2 R^2;
    # the quartic keeps the interior truncation error alive
    import scipy.sparse.linalg as spla

    errs = []
    for n in (41, 81, 161):
        dom = disk_domain(1.0, n)
        X, Y = dom.nodes()
        exact = X**2 * (1.0 - X**2 - Y**2)
        L = neg_laplacian(dom)
        rhs = (14.0 * X**2 + 2.0 * Y**2 - 2.0)[dom.interior]
        u = spla.spsolve(L.tocsc(), rhs)
        errs.append(np.abs(u - exact[dom.interior]).max())
    r1 = np.log2(errs[0] / errs[1])
    r2 = np.log2(errs[1] / errs[2])
    assert 1.7 < r1 < 2.6
    assert 1.7 < r2 < 2.6


def test_rect_laplacian_eigenfunction():
    dom = rect_domain(2.0, 1.0, 81)
    X, Y = dom.nodes()
    u = np.cos(np.pi * X / 2.0) * np.cos(np.pi * Y)  # vanishes on the walls
    lam = (np.pi / 2.0) ** 2 + np.pi**2
    L = neg_laplacian(dom)
    resid = L @ u[dom.interior] - lam * u[dom.interior]
    assert np.abs(resid).max() < lam * dom.h**2  # O(h^2) eigen-residual


def test_integrate_quarter():
    dom = rect_domain(2.0, 1.0, 201)
    X, Y = dom.nodes()
    val = integrate(dom, np.ones_like(X))
    assert val == pytest.approx(2.0, rel=0.03)  # boundary band excluded


def test_bilinear_exact_on_bilinear():
    dom = rect_domain(2.0, 1.0, 21)
    X, Y = dom.nodes()
    V = 2.0 + 3.0 * X - 1.5 * Y + 0.7 * X * Y
    rng = np.random.default_rng(7)
    px = rng.uniform(-0.9, 0.9, 50)
    py = rng.uniform(-0.45, 0.45, 50)
    got = bilinear(dom, V, px, py)
    want = 2.0 + 3.0 * px - 1.5 * py + 0.7 * px * py
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
    with pytest.raises(OutOfDomain):
        bilinear(dom, V, np.array([3.0]), np.array([0.0]))


def test_restrict_to_between_grids():
    a = disk_domain(1.0, 41)
    b = disk_domain(1.0, 81)
    X, Y = a.nodes()
    V = 1.0 + X + 2 * Y
    W = restrict_to(a, V, b)
    Xb, Yb = b.nodes()
    want = (1.0 + Xb + 2 * Yb)
    assert np.allclose(W[b.interior], want[b.interior], rtol=0, atol=1e-12)


def test_field_dump_roundtrip(tmp_path):
    dom = disk_domain(0.6, 31)
    X, Y = dom.nodes()
    V = np.where(dom.interior, np.hypot(X, Y), 0.0)
    path = tmp_path / "f.pslb"
    write_field(path, dom, V, eps=2.5e-3, p=2.0)
    dom2, V2, eps, p = read_field(path)
    assert dom2.shape == "disk"
    assert dom2.nx == 31 and dom2.h == pytest.approx(dom.h)
    assert eps == pytest.approx(2.5e-3)
    assert p == pytest.approx(2.0)
    assert np.allclose(V2[dom2.interior], V[dom.interior])
    assert np.array_equal(dom2.interior, dom.interior)


def test_field_dump_rect(tmp_path):
    dom = rect_domain(2.0, 1.0, 41)
    V = np.zeros((dom.ny, dom.nx))
    V[dom.interior] = 1.0
    path = tmp_path / "r.pslb"
    write_field(path, dom, V, eps=1e-2, p=3.0)
    dom2, V2, eps, p = read_field(path)
    assert dom2.shape == "rect"
    assert dom2.Lx == pytest.approx(2.0)
    assert dom2.Ly == pytest.approx(1.0)
    assert np.array_equal(dom2.interior, dom.interior)


def test_field_csv(tmp_path):
    dom = rect_domain(1.0, 1.0, 11)
    V = np.ones((dom.ny, dom.nx))
    path = tmp_path / "f.csv"
    write_field_csv(path, dom, V)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,y,v"
    assert len(lines) == 1 + dom.ny * dom.nx
