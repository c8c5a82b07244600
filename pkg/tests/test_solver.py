import numpy as np
import pytest
from scipy.ndimage import label

from spikelab.emden import solve_emden
from spikelab.errors import NonConvergence, ZeroPlasma
from spikelab.grid import disk_domain, rect_domain
from spikelab.profiles import build_profile, constraint_parameters
from spikelab.solver import (
    GridSolution,
    SolverConfig,
    SpikeInit,
    constraint_defect,
    continuation_sweep,
    mesh_refinement_errors,
    profile_field,
    recover_parameters,
    solve,
)

R2 = 1.0 / np.sqrt(np.pi)


@pytest.fixture(scope="module")
def emden2():
    return solve_emden(2.0, tol=1e-10)


@pytest.fixture(scope="module")
def disk_sol(emden2):
    prof = build_profile(emden2, eps=0.02)
    dom = disk_domain(R2, 161)
    return prof, solve(dom, emden2, 0.02, prof)


def test_zero_field_is_solution(emden2):
    dom = disk_domain(R2, 41)
    sol = solve(dom, emden2, 0.01, "zero")
    assert sol.converged
    assert sol.iterations <= 1
    assert sol.residual == 0.0
    assert np.all(sol.v == 0.0)


def test_disk_matches_model(disk_sol, emden2):
    prof, sol = disk_sol
    assert sol.converged
    assert sol.iterations <= 10
    ref = profile_field(sol.domain, prof)
    err = np.abs(sol.v - ref)[sol.domain.interior].max()
    assert err < 2e-2
    # single interior spike, no wandering to another profile
    lab, ncomp = label(sol.v > 1.0)
    assert ncomp == 1
    assert sol.v_max == pytest.approx(prof.peak, abs=2e-2)


def test_positivity_and_interior_max(disk_sol):
    _, sol = disk_sol
    inner = sol.v[sol.domain.interior]
    assert inner.min() > 0.0  # positive source keeps v positive inside
    assert sol.peak_boundary_distance() > 0.3 * R2


def test_mesh_refinement_second_order(emden2):
    prof = build_profile(emden2, eps=0.02)
    errs = mesh_refinement_errors(emden2, 0.02, prof, (81, 161, 321))
    rates = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.6 < r < 2.6 for r in rates)


def test_recover_parameters_roundtrip(disk_sol, emden2):
    prof, sol = disk_sol
    ps = recover_parameters(sol)
    assert ps.alpha < 0
    assert sol.eps**2 * abs(ps.alpha) ** (sol.p - 1) * ps.lam == pytest.approx(1.0, rel=1e-12)
    assert ps.I_total == pytest.approx(ps.lam**ps.q, rel=1e-12)
    assert constraint_defect(sol, ps) < 1e-12
    # independent route: the model profile's own constraint parameters
    cp = constraint_parameters(prof)
    assert abs(ps.alpha) == pytest.approx(cp.alpha_abs, rel=2e-2)
    assert ps.lam == pytest.approx(cp.lam, rel=2e-2)


def test_zero_plasma_raises(emden2):
    dom = disk_domain(R2, 41)
    sol = solve(dom, emden2, 0.01, "zero")
    with pytest.raises(ZeroPlasma):
        recover_parameters(sol)


def test_hypothesis_masses_reported(disk_sol, emden2):
    _, sol = disk_sol
    assert sol.h1_mass == pytest.approx(emden2.I_pm1, rel=0.05)
    assert sol.h2_mass == pytest.approx(emden2.I_p, rel=0.05)
    assert sol.theta > 0


def test_rect_single_spike_center(emden2):
    dom = rect_domain(2.0, 1.0, 161)
    sol = solve(dom, emden2, 0.02, SpikeInit(centers=((0.0, 0.0),)))
    assert sol.converged
    lab, ncomp = label(sol.v > 1.0)
    assert ncomp == 1
    i, j = np.unravel_index(np.argmax(sol.v), sol.v.shape)
    X, Y = sol.domain.nodes()
    assert abs(X[i, j]) < 2 * dom.h and abs(Y[i, j]) < 2 * dom.h
    assert lab[i, j] == 1


def test_rect_two_spike_quasi_state(emden2):
    # no interior two-spike equilibrium exists on a convex rectangle, so the
    # damped iteration returns its best near-solution, flagged; the plasma
    # set still shows two components with quantized mass
    dom = rect_domain(2.0, 1.0, 161)
    cfg = SolverConfig(max_iter=20, keep_nonconverged=True)
    sol = solve(dom, emden2, 0.02, SpikeInit(centers=((-0.5, 0.0), (0.5, 0.0))), cfg)
    assert not sol.converged
    assert sol.residual < 5e-2
    lab, ncomp = label(sol.v > 1.0)
    assert ncomp == 2
    assert sol.h1_mass == pytest.approx(2 * emden2.I_pm1, rel=0.10)


def test_continuation_single_matches_solve(emden2):
    dom = disk_domain(R2, 81)
    prof = build_profile(emden2, eps=0.02)
    one = continuation_sweep(dom, emden2, [0.02], prof)[0]
    two = solve(dom, emden2, 0.02, prof)
    assert np.allclose(one.v, two.v, atol=1e-12)


def test_continuation_warm_start_refines(emden2):
    doms = [disk_domain(R2, 81), disk_domain(R2, 129)]
    prof = build_profile(emden2, eps=0.02)
    sols = continuation_sweep(doms, emden2, [0.02, 0.014], prof)
    assert all(s.converged for s in sols)
    assert sols[1].domain.nx == 129
    assert sols[1].v_max < sols[0].v_max  # peaks decay toward the plasma level


def test_continuation_schedule_validation(emden2):
    dom = disk_domain(R2, 41)
    with pytest.raises(NonConvergence):
        continuation_sweep(dom, emden2, [0.01, 0.02], "zero")
    with pytest.raises(NonConvergence):
        continuation_sweep([dom], emden2, [0.01, 0.005], "zero")


def test_solution_is_frozen(disk_sol):
    _, sol = disk_sol
    assert isinstance(sol, GridSolution)
    with pytest.raises(Exception):
        sol.eps = 1.0


def test_negative_undershoot_without_fallback(emden2):
    # strict Armijo with no Picard fallback must surface the damping failure
    from spikelab.errors import NegativeUndershoot

    dom = disk_domain(R2, 41)
    v0 = np.full((dom.ny, dom.nx), 2.0)
    v0[~dom.interior] = 0.0
    cfg = SolverConfig(picard_fallback=False, armijo=0.999, tau_min=0.9, max_iter=10)
    with pytest.raises(NegativeUndershoot):
        solve(dom, emden2, 0.02, v0, cfg)
