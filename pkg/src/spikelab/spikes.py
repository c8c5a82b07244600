"""Peak extraction, blow-up rescaling, ball masses, and spike taxonomy.

Peaks above the plasma level are pulled greedily (global maximum, then the
maximum outside exclusion balls).  Each peak gets a sharpness parameter

    t = (phi(0) / (theta * (v(x) - 1)))^{(p-1)/2}

so the normalized rescaling u(z) = t^{2/(p-1)} theta (v(x + s t z) - 1)
is pinned to u(0) = phi(0).  Across a decreasing-eps sweep the tracked
sequences are labeled Type I (t bounded, s t -> 0), Type II (t unbounded,
s t -> 0), Fading (s t bounded below), or Vanishing (no supercritical
peaks from some eps on), by fitted finite-data trends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import label as flood_label

from .emden import EmdenSolution, eval_phi
from .errors import InsufficientData, OutOfDomain
from .grid import bilinear
from .scales import ScaleParams, solve_scale
from .solver import GridSolution


@dataclass(frozen=True)
class SpikeRecord:
    """Per-peak diagnostics at one eps."""

    x: tuple[float, float]
    peak: float
    t: float
    ball_mass_pm1: float
    ball_mass_p: float
    profile_dist: float
    R_used: float
    eps: float
    s: float
    theta: float
    h2_total: float


@dataclass
class SpikeSequence:
    """One tracked peak along decreasing eps."""

    records: list[SpikeRecord] = field(default_factory=list)
    vanished: bool = False

    @property
    def t_values(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def st_values(self) -> np.ndarray:
        return np.array([r.s * r.t for r in self.records])


@dataclass(frozen=True)
class ClassifyConfig:
    """Finite-data thresholds; configuration, not truth claims."""

    drift: float = 0.10
    decay_factor: float = 4.0
    floor: float = 0.1
    min_records: int = 4


@dataclass(frozen=True)
class Classification:
    label: str
    t_inf_estimate: float | None = None
    rho_estimate: float | None = None
    t_lower_bound: float | None = None
    t_lower_bound_ok: bool | None = None
    diagnostics: dict = field(default_factory=dict)


def find_peaks(sol: GridSolution, min_separation: float) -> list[tuple[tuple[float, float], float]]:
    """Greedy supercritical peaks: global max, then maxima outside exclusion balls."""
    X, Y = sol.domain.nodes()
    allowed = sol.domain.interior.copy()
    out = []
    v = sol.v
    while True:
        masked = np.where(allowed, v, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), v.shape)
        if not np.isfinite(masked[i, j]) or masked[i, j] <= 1.0:
            break
        x, y = float(X[i, j]), float(Y[i, j])
        out.append(((x, y), float(v[i, j])))
        allowed &= (X - x) ** 2 + (Y - y) ** 2 > min_separation**2
    return out


def sharpness(peak: float, theta: float, phi0: float, p: float) -> float:
    """t from the peak excess over the plasma level."""
    return (phi0 / (theta * (peak - 1.0))) ** ((p - 1.0) / 2.0)


def normalize_rescale(
    sol: GridSolution,
    x_n: tuple[float, float],
    scales: ScaleParams,
    emden: EmdenSolution,
    R: float = 2.0,
    n: int = 81,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Sample u(z) on the square hull of B_R(0); returns (z_axis, u, t)."""
    peak = float(bilinear(sol.domain, sol.v, np.array([x_n[0]]), np.array([x_n[1]]))[0])
    if peak <= 1.0:
        raise OutOfDomain("peak value at or below the plasma level")
    t = sharpness(peak, scales.theta, emden.phi0, sol.p)
    reach = R * scales.s * t
    if reach > sol.domain.boundary_distance(*x_n):
        raise OutOfDomain(
            f"comparison ball of radius {reach:.3g} leaves the domain"
        )
    z = np.linspace(-R, R, n)
    ZX, ZY = np.meshgrid(z, z, indexing="xy")
    px = x_n[0] + scales.s * t * ZX
    py = x_n[1] + scales.s * t * ZY
    u = t ** (2.0 / (sol.p - 1.0)) * scales.theta * (bilinear(sol.domain, sol.v, px, py) - 1.0)
    return z, u, t


def reference_shape(emden: EmdenSolution, rho: np.ndarray) -> np.ndarray:
    """The unit-radius entire solution as a function of |z|."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(rho)
    core = rho <= 1.0
    out[core] = eval_phi(emden, rho[core])
    out[~core] = emden.dphi1 * np.log(rho[~core])
    return out


def profile_distance(
    sol: GridSolution,
    x_n: tuple[float, float],
    scales: ScaleParams,
    emden: EmdenSolution,
    R: float = 2.0,
    n: int = 81,
) -> tuple[float, float]:
    """Sup over B_R(0) of |u - w*|; returns (distance, t)."""
    z, u, t = normalize_rescale(sol, x_n, scales, emden, R=R, n=n)
    ZX, ZY = np.meshgrid(z, z, indexing="xy")
    rho = np.hypot(ZX, ZY)
    inside = rho <= R
    dist = float(np.abs(u - reference_shape(emden, rho))[inside].max())
    return dist, t


def ball_masses(
    sol: GridSolution,
    x_n: tuple[float, float],
    radius: float,
    scales: ScaleParams,
) -> tuple[float, float]:
    """Weighted masses of [v - 1]_+ over the ball of given radius."""
    if radius > sol.domain.boundary_distance(*x_n):
        raise OutOfDomain("mass ball leaves the domain")
    X, Y = sol.domain.nodes()
    inside = ((X - x_n[0]) ** 2 + (Y - x_n[1]) ** 2 <= radius**2) & sol.domain.interior
    w = np.maximum(sol.v[inside] - 1.0, 0.0)
    h2cell = sol.domain.h**2
    mass_pm1 = float((w ** (sol.p - 1.0)).sum()) * h2cell / sol.eps**2
    mass_p = scales.theta * float((w**sol.p).sum()) * h2cell / sol.eps**2
    return mass_pm1, mass_p


def analyze_solution(
    sol: GridSolution,
    emden: EmdenSolution,
    ball_factor: float = 4.0,
    R: float = 2.0,
    min_separation: float | None = None,
) -> list[SpikeRecord]:
    """Peaks of one solution with their rescaling and mass diagnostics."""
    sc = solve_scale(sol.eps, emden.dphi1, emden.p)
    if min_separation is None:
        min_separation = 6.0 * sc.s
    records = []
    for (loc, peak) in find_peaks(sol, min_separation):
        t = sharpness(peak, sc.theta, emden.phi0, sol.p)
        radius = min(ball_factor * sc.s * t, 0.95 * sol.domain.boundary_distance(*loc))
        m1, m2 = ball_masses(sol, loc, radius, sc)
        try:
            dist, _ = profile_distance(sol, loc, sc, emden, R=R)
        except OutOfDomain:
            dist = np.nan
        records.append(
            SpikeRecord(
                x=loc, peak=peak, t=t, ball_mass_pm1=m1, ball_mass_p=m2,
                profile_dist=dist, R_used=R, eps=sol.eps, s=sc.s,
                theta=sc.theta, h2_total=sol.h2_mass,
            )
        )
    return records


def track_spikes(
    sweep: list[GridSolution],
    emden: EmdenSolution,
    ball_factor: float = 4.0,
    R: float = 2.0,
    min_separation: float | None = None,
) -> list[SpikeSequence]:
    """Match peaks across a decreasing-eps sweep by nearest location.

    The matching cutoff is 3 s t of the earlier record; a sequence that
    stops matching while the later solutions have no supercritical peaks
    at all is marked vanished.
    """
    sequences: list[SpikeSequence] = []
    for sol in sweep:
        records = analyze_solution(
            sol, emden, ball_factor=ball_factor, R=R, min_separation=min_separation
        )
        unclaimed = list(records)
        for seq in sequences:
            if not seq.records or seq.vanished:
                continue
            last = seq.records[-1]
            cutoff = 3.0 * last.s * last.t
            best, best_d = None, np.inf
            for rec in unclaimed:
                d = float(np.hypot(rec.x[0] - last.x[0], rec.x[1] - last.x[1]))
                if d < best_d:
                    best, best_d = rec, d
            if best is not None and best_d <= cutoff:
                seq.records.append(best)
                unclaimed.remove(best)
            elif not records:
                seq.vanished = True
        for rec in unclaimed:
            sequences.append(SpikeSequence(records=[rec]))
    return sequences


def _last_drift(values: np.ndarray, k: int) -> float:
    """Relative least-squares drift of the last k values."""
    tail = values[-k:]
    idx = np.arange(tail.size, dtype=float)
    slope = np.polyfit(idx, tail, 1)[0]
    return abs(slope) * (tail.size - 1) / abs(tail.mean())


def classify(
    seq: SpikeSequence,
    emden: EmdenSolution,
    thresholds: ClassifyConfig | None = None,
) -> Classification:
    """Label a tracked sequence by its fitted trends."""
    cfg = thresholds or ClassifyConfig()
    recs = seq.records
    if recs and all(r.peak <= 1.0 for r in recs):
        return Classification(label="Vanishing")
    if seq.vanished:
        return Classification(label="Vanishing")
    if len(recs) < cfg.min_records:
        raise InsufficientData(
            f"{len(recs)} records < {cfg.min_records} required"
        )

    t = seq.t_values
    st = seq.st_values
    t_drift = _last_drift(t, cfg.min_records)
    st_decay = st[0] / st[-1]
    h_p = max(r.h2_total for r in recs)
    t_bound = (emden.I_p / (2.0 * h_p)) ** ((emden.p - 1.0) / 2.0)
    diag = {
        "t_drift": t_drift,
        "st_decay_factor": st_decay,
        "st_min": float(st.min()),
        "t_series": t.tolist(),
        "st_series": st.tolist(),
    }

    if st.min() > cfg.floor:
        p = emden.p
        rho = float(np.mean([(r.peak - 1.0) / r.eps ** (2.0 / (p - 1.0)) for r in recs[-cfg.min_records:]]))
        return Classification(
            label="Fading", rho_estimate=rho, t_lower_bound=t_bound,
            t_lower_bound_ok=bool(np.all(t >= t_bound)), diagnostics=diag,
        )
    decays = st_decay >= cfg.decay_factor
    bounded = t_drift < cfg.drift
    if decays and bounded:
        lab = "TypeI"
    elif decays and not bounded and t[-1] > t[0]:
        lab = "TypeII"
    else:
        lab = "TypeI" if bounded else "TypeII"
        diag["weak_decay"] = True
    return Classification(
        label=lab,
        t_inf_estimate=float(np.mean(t[-cfg.min_records:])) if lab == "TypeI" else float("inf"),
        t_lower_bound=t_bound,
        t_lower_bound_ok=bool(np.all(t >= t_bound)),
        diagnostics=diag,
    )


def roundness(
    sol: GridSolution,
    spikes: list[SpikeRecord],
    theta_round: float,
) -> dict:
    """Check the two-sided disk containment of each plasma component.

    For spike j the component through x_j must contain the ball of radius
    (1 - theta) s t and be contained in the ball of radius (1 + theta) s t,
    both at grid resolution.  Reports the tightest theta that passes.
    """
    labels, ncomp = flood_label(sol.plasma_mask())
    if ncomp == 0:
        return {"components": 0, "passes": False, "note": "no components"}
    X, Y = sol.domain.nodes()
    h = sol.domain.h
    report = {"components": int(ncomp), "spikes": [], "theta": theta_round}
    all_pass = True
    for rec in spikes:
        st = rec.s * rec.t
        i = int(round((rec.x[1] - sol.domain.y0) / h))
        j = int(round((rec.x[0] - sol.domain.x0) / h))
        comp = labels[i, j]
        if comp == 0:
            all_pass = False
            report["spikes"].append({"x": rec.x, "ok": False, "note": "peak not in plasma set"})
            continue
        mine = labels == comp
        d = np.hypot(X - rec.x[0], Y - rec.x[1])
        outside = ~mine & sol.domain.interior
        d_in = float(d[outside].min()) if outside.any() else np.inf
        d_out = float(d[mine].max())
        # tightest passing theta, with one-cell slack for the staircase boundary
        t_inner = 1.0 - (d_in - h) / st
        t_outer = (d_out + h) / st - 1.0
        tightest = max(t_inner, t_outer, 0.0)
        ok = (d_in >= (1.0 - theta_round) * st - h) and (d_out <= (1.0 + theta_round) * st + h)
        all_pass &= ok
        report["spikes"].append(
            {"x": rec.x, "ok": bool(ok), "tightest_theta": tightest,
             "covered_radius": d_in, "outer_radius": d_out, "st": st}
        )
    report["passes"] = bool(all_pass)
    return report


def separation_ratios(records_per_eps: list[list[SpikeRecord]]) -> list[float]:
    """Min pairwise separation over s * max(t) per sweep step (multi-spike)."""
    out = []
    for recs in records_per_eps:
        if len(recs) < 2:
            out.append(float("inf"))
            continue
        best = np.inf
        for i in range(len(recs)):
            for j in range(i + 1, len(recs)):
                d = np.hypot(recs[i].x[0] - recs[j].x[0], recs[i].x[1] - recs[j].x[1])
                scale = recs[i].s * max(recs[i].t, recs[j].t)
                best = min(best, d / scale)
        out.append(float(best))
    return out


def quantization_report(
    sweep: list[GridSolution],
    emden: EmdenSolution,
) -> dict:
    """Totals of the weighted masses per eps and the inferred spike count."""
    rows = []
    for sol in sweep:
        rows.append({
            "eps": sol.eps,
            "h1_total": sol.h1_mass,
            "h2_total": sol.h2_mass,
            "converged": sol.converged,
        })
    h1_last = rows[-1]["h1_total"]
    n_est = int(round(h1_last / emden.I_pm1))
    gamma_inf = 1.0 / rows[-1]["h2_total"] if rows[-1]["h2_total"] > 0 else float("inf")
    residual = abs(h1_last / (n_est * emden.I_pm1) - 1.0) if n_est > 0 else float("nan")
    return {
        "rows": rows,
        "spike_count": n_est,
        "quantization_residual": residual,
        "gamma_inf_estimate": gamma_inf,
        "I_pm1": emden.I_pm1,
    }
