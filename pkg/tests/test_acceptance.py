"""Acceptance suite: one test per exit criterion, at the stated tolerances.

Run `pytest -s tests/test_acceptance.py` to see a pass line per criterion.
The continuation sweeps are session work-horses shared across criteria;
the whole module targets a desktop-minutes budget with grids up to 1025^2.
"""

import time

import numpy as np
import pytest
from scipy.ndimage import label as flood_label

from spikelab.emden import solve_emden
from spikelab.entire import make_entire, masses, rescale
from spikelab.green import (
    DiskGreen,
    KRConfig,
    RectGreen,
    far_field_check,
    kr_critical,
    kr_gradient,
    kr_hamiltonian,
)
from spikelab.grid import disk_domain, rect_domain
from spikelab.profiles import (
    build_profile,
    constraint_parameters,
    mass_by_quadrature,
    profile_masses,
    radial_residual,
)
from spikelab.solver import (
    SolverConfig,
    SpikeInit,
    continuation_sweep,
    profile_field,
    recover_parameters,
    solve,
)
from spikelab.spikes import (
    ClassifyConfig,
    analyze_solution,
    classify,
    roundness,
    track_spikes,
)

from .synthetic import subcritical_field, synthetic_fading

R2 = 1.0 / np.sqrt(np.pi)
P_SWEEP = (1.5, 2.0, 3.0, 5.0)

EPS_DISK = (0.02, 0.014142, 0.01, 0.0070711, 0.005, 0.0035355, 0.0025)
N_DISK = (97, 145, 217, 321, 481, 721, 1025)

EPS_RECT = (0.02, 0.014142, 0.01)
N_RECT = (161, 241, 321)
TWO_CENTERS = ((-0.5, 0.0), (0.5, 0.0))


def report(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPT {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def emdens():
    out = {}
    for p in P_SWEEP:
        t0 = time.monotonic()
        out[p] = (solve_emden(p, tol=1e-10), time.monotonic() - t0)
    return out


@pytest.fixture(scope="module")
def disk_sweep():
    em = solve_emden(2.0, tol=1e-10)
    domains = [disk_domain(R2, n) for n in N_DISK]
    t0 = time.monotonic()
    sweep = continuation_sweep(domains, em, EPS_DISK,
                               SpikeInit(centers=((0.0, 0.0),)), SolverConfig())
    elapsed = time.monotonic() - t0
    records = [analyze_solution(s, em) for s in sweep]
    return em, sweep, records, elapsed


@pytest.fixture(scope="module")
def rect_single():
    em = solve_emden(2.0, tol=1e-10)
    domains = [rect_domain(2.0, 1.0, n) for n in N_RECT]
    sweep = continuation_sweep(domains, em, EPS_RECT,
                               SpikeInit(centers=((0.0, 0.0),)), SolverConfig())
    return em, sweep


@pytest.fixture(scope="module")
def rect_two():
    em = solve_emden(2.0, tol=1e-10)
    domains = [rect_domain(2.0, 1.0, n) for n in N_RECT]
    cfg = SolverConfig(max_iter=25, keep_nonconverged=True)
    t0 = time.monotonic()
    sweep = continuation_sweep(domains, em, EPS_RECT,
                               SpikeInit(centers=TWO_CENTERS), cfg)
    return em, sweep, time.monotonic() - t0


def test_emden_identity_suite(emdens):
    worst_flux, worst_poho, worst_time = 0.0, 0.0, 0.0
    for p, (em, dt) in emdens.items():
        worst_flux = max(worst_flux, abs(em.I_p + 2 * np.pi * em.dphi1))
        worst_poho = max(worst_poho, abs(em.I_pp1 - (p + 1) / (8 * np.pi) * em.I_p**2))
        worst_time = max(worst_time, dt)
    ok = worst_flux < 1e-8 and worst_poho < 1e-8 and worst_time < 10.0
    report("emden-identities", ok,
           f"flux {worst_flux:.2e}, pohozaev {worst_poho:.2e}, slowest {worst_time:.2f}s")


def test_emden_bounds_suite(emdens):
    ok = True
    for p, (em, _) in emdens.items():
        ok &= em.I_p / em.phi0 < em.I_pm1 < np.pi * em.phi0 ** (p - 1)
        ok &= em.I_pm1 < em.I_p ** (1 - 1 / p) * np.pi ** (1 / p)
    report("emden-bounds", ok, f"strict inequalities over p in {P_SWEEP}")


def test_entire_mass_laws(emdens):
    worst_inv, worst_scale, worst_poho = 0.0, 0.0, 0.0
    for p in (2.0, 3.0):
        em = emdens[p][0]
        w = make_entire(em, 1.0)
        base = np.array(masses(w))
        ex = 2.0 / (p - 1.0)
        for t in (0.5, 2.0, 7.0):
            bt = np.array(masses(rescale(w, t)))
            worst_inv = max(worst_inv, abs(bt[0] / base[0] - 1.0))
            worst_scale = max(worst_scale, abs(bt[1] / (t**ex * base[1]) - 1.0))
            worst_scale = max(worst_scale, abs(bt[2] / (t ** (2 * ex) * base[2]) - 1.0))
        worst_poho = max(worst_poho, abs(base[2] - (p + 1) / 4 * base[1] ** 2))
    ok = worst_inv < 1e-10 and worst_scale < 1e-10 and worst_poho < 1e-8
    report("entire-mass-laws", ok,
           f"invariance {worst_inv:.2e}, scaling {worst_scale:.2e}, energy {worst_poho:.2e}")


def test_model_profile_masses(emdens):
    em = emdens[2.0][0]
    eps_list = np.geomspace(1e-4, 1e-6, 9)  # two decades
    pm1_dev, pmasses, lns = [], [], []
    for eps in eps_list:
        prof = build_profile(em, eps)
        pm1_dev.append(abs(mass_by_quadrature(prof, -1) / em.I_pm1 - 1.0))
        pmasses.append(profile_masses(prof, 1.0))
        lns.append(abs(np.log(prof.s_eps)))
    slope = np.polyfit(np.log(lns), np.log(pmasses), 1)[0]
    prof = build_profile(em, 1e-2)
    r1 = radial_residual(prof, n=2001)
    r2 = radial_residual(prof, n=4001)
    rate = np.log2(r1 / r2)
    ok = max(pm1_dev) < 1e-6 and -1.1 <= slope <= -0.9 and 1.8 <= rate <= 2.2
    report("model-profile", ok,
           f"pm1 dev {max(pm1_dev):.2e}, p-mass exponent {slope:.3f}, residual rate {rate:.2f}")


def test_matching_cross_check(emdens):
    em = emdens[2.0][0]
    worst = 0.0
    for eps in (1e-2, 1e-3, 1e-4, 1e-6):
        prof = build_profile(em, eps)
        cp = constraint_parameters(prof)
        worst = max(worst, abs(cp.s_closed_form - prof.s_eps) / prof.s_eps)
    ok = worst < 1e-8
    report("matching-cross-check", ok, f"max relative gap {worst:.2e}")


def test_solver_vs_model(emdens):
    em = emdens[2.0][0]
    worst_rate = np.inf
    worst_alpha = 0.0
    details = []
    for eps in (0.02, 0.014142, 0.01):
        prof = build_profile(em, eps)
        errs = []
        for n in (129, 257, 513):
            dom = disk_domain(R2, n)
            sol = solve(dom, em, eps, prof)
            assert sol.converged
            errs.append(np.abs(sol.v - profile_field(dom, prof))[dom.interior].max())
        rate = np.log2(errs[0] / errs[2]) / 2.0
        worst_rate = min(worst_rate, rate)
        ps = recover_parameters(sol)
        cp = constraint_parameters(prof)
        worst_alpha = max(worst_alpha, abs(abs(ps.alpha) / cp.alpha_abs - 1.0))
        details.append(f"eps={eps}: rate {rate:.2f}")
    ok = worst_rate > 1.7 and worst_alpha < 5e-3
    report("solver-vs-model", ok,
           f"{'; '.join(details)}; alpha gap {worst_alpha:.2e}")


def test_quantization_desk_scale(disk_sweep, rect_two):
    em, sweep, _, disk_time = disk_sweep
    _, rsweep, rect_time = rect_two
    disk_dev = abs(sweep[-1].h1_mass / em.I_pm1 - 1.0)
    rect_dev = abs(rsweep[-1].h1_mass / (2 * em.I_pm1) - 1.0)
    lab, ncomp = flood_label(rsweep[-1].v > 1.0)
    flags = [s.converged for s in rsweep]
    ok = (disk_dev < 0.05 and rect_dev < 0.10 and ncomp == 2
          and disk_time < 600 and rect_time < 600)
    report("quantization", ok,
           f"disk dev {disk_dev:.3f} ({disk_time:.0f}s), two-spike rect dev {rect_dev:.3f} "
           f"({rect_time:.0f}s, {ncomp} components, converged flags {flags}: "
           f"quasi-equilibria, no interior pair equilibrium exists on a convex box)")


def test_classification(disk_sweep):
    em, sweep, _, _ = disk_sweep
    seqs = track_spikes(sweep, em)
    assert len(seqs) == 1
    cls = classify(seqs[0], em)
    t = seqs[0].t_values
    tail = t[-4:]
    drift = abs(np.polyfit(np.arange(4.0), tail, 1)[0]) * 3 / tail.mean()
    ok_disk = cls.label == "TypeI" and drift < 0.10 and np.isfinite(cls.t_inf_estimate)

    fading = [synthetic_fading(em, e) for e in (0.02, 0.014142, 0.01, 0.0070711, 0.005)]
    fseq = track_spikes(fading, em)
    ok_fading = len(fseq) == 1 and classify(fseq[0], em).label == "Fading"

    sub = [subcritical_field(em, e) for e in (0.02, 0.01)]
    ok_vanish = track_spikes(sub, em) == []
    from spikelab.spikes import SpikeSequence

    ok_vanish &= classify(SpikeSequence(records=[], vanished=True), em).label == "Vanishing"
    ok = ok_disk and ok_fading and ok_vanish
    report("classification", ok,
           f"disk TypeI (t drift {drift:.3f}, t_inf {cls.t_inf_estimate:.3f}), "
           f"synthetic Fading, subcritical Vanishing")


def test_roundness(disk_sweep, rect_single, rect_two):
    em, sweep, records, _ = disk_sweep
    rep_disk = roundness(sweep[-1], records[-1], theta_round=0.25)
    em2, rsweep = rect_single
    rep_rect = roundness(rsweep[-1], analyze_solution(rsweep[-1], em2), theta_round=0.25)
    _, r2sweep, _ = rect_two
    rep_two = roundness(r2sweep[-1], analyze_solution(r2sweep[-1], em), theta_round=0.25)
    ok = rep_disk["passes"] and rep_rect["passes"] and rep_two["passes"]
    report("roundness", ok,
           f"disk tightest {rep_disk['spikes'][0]['tightest_theta']:.3f}, "
           f"rect tightest {rep_rect['spikes'][0]['tightest_theta']:.3f}, "
           f"two-spike components {rep_two['components']}")


def test_kirchhoff_routh(disk_sweep):
    rng = np.random.default_rng(42)
    worst = 0.0
    d = 1e-5
    checked = 0
    while checked < 20:
        if checked % 2 == 0:
            gf = DiskGreen(1.0)
            pts = rng.uniform(-0.55, 0.55, (2, 2))
        else:
            gf = RectGreen(2.0, 1.0)
            pts = np.column_stack([rng.uniform(-0.8, 0.8, 2), rng.uniform(-0.38, 0.38, 2)])
        if np.hypot(*(pts[0] - pts[1])) < 0.25:
            continue
        ms = rng.uniform(0.5, 2.0, 2)
        cfg = KRConfig.of(pts, ms)
        g = kr_gradient(gf, cfg)
        for i in range(2):
            for k in range(2):
                shift = np.zeros_like(pts)
                shift[i, k] = d
                fd = (kr_hamiltonian(gf, KRConfig.of(pts + shift, ms))
                      - kr_hamiltonian(gf, KRConfig.of(pts - shift, ms))) / (2 * d)
                scale = max(abs(fd), 1e-6)
                worst = max(worst, abs(g[i, k] - fd) / scale)
        checked += 1
    ok_grad = worst < 1e-6

    crit_d = kr_critical(DiskGreen(1.0), KRConfig.of([[0.3, -0.2]]), tol=1e-12)
    crit_r = kr_critical(RectGreen(2.0, 1.0), KRConfig.of([[0.5, 0.2]]), tol=1e-12)
    ok_crit = (np.hypot(*crit_d.points[0]) < 1e-8
               and float(np.abs(crit_r.points[0]).max()) < 1e-8)

    em, sweep, records, _ = disk_sweep
    devs = [far_field_check(s, r, em, radii=(0.3,))[0.3]["mean_rel"]
            for s, r in zip(sweep, records)]
    ok_far = all(b < a for a, b in zip(devs, devs[1:]))
    ok = ok_grad and ok_crit and ok_far
    report("kirchhoff-routh", ok,
           f"grad vs FD {worst:.2e} over 20 configs, critical to center "
           f"({np.hypot(*crit_d.points[0]):.1e}, {np.abs(crit_r.points[0]).max():.1e}), "
           f"far-field devs {['%.4f' % v for v in devs]}")


def test_parameter_trend(disk_sweep):
    _, sweep, _, _ = disk_sweep
    ratios = []
    for sol in sweep:
        ps = recover_parameters(sol)
        ratios.append(abs(ps.alpha) / (ps.lam * np.log(ps.lam)))
    tail = np.array(ratios[-4:])
    drift = abs(np.polyfit(np.arange(4.0), tail, 1)[0]) * 3 / tail.mean()
    ok = drift < 0.15
    report("parameter-trend", ok,
           f"|alpha|/(lambda ln lambda) tail {['%.4f' % r for r in ratios[-4:]]}, "
           f"fitted drift {drift:.3f}")


def test_primary_runs_without_secondary():
    # the rendering package is a separate component; nothing here imports it
    import sys

    loaded = [m for m in sys.modules if m.startswith("figkit")]
    report("primary-standalone", loaded == [], "no figure package imported by the suite")
