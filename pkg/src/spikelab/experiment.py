"""End-to-end experiment pipelines with reproducible, self-describing output.

A config is a JSON-compatible tree; every default is materialized into the
report so a bundle fully records how it was produced.  Re-running the same
config byte-reproduces all JSON/CSV artifacts (no timestamps, no
environment state, fixed float repr).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .emden import solve_emden
from .errors import ConfigError
from .green import KRConfig, far_field_check, green_fn, kr_critical, kr_gradient
from .grid import disk_domain, rect_domain, write_field, write_field_csv
from .profiles import R2 as UNIT_AREA_RADIUS
from .scales import solve_scale
from .solver import SolverConfig, SpikeInit, continuation_sweep, recover_parameters
from .spikes import (
    ClassifyConfig,
    analyze_solution,
    classify,
    normalize_rescale,
    quantization_report,
    reference_shape,
    roundness,
    track_spikes,
)

DEFAULTS = {
    "kind": None,
    "p": 2.0,
    "domain": None,
    "eps_schedule": None,
    "grid_schedule": None,
    "initial_guess": {"centers": [[0.0, 0.0]], "a": 1.0, "b": 0.0},
    "tolerances": {
        "emden_tol": 1e-10,
        "solver_tol": 1e-10,
        "classify": {"drift": 0.10, "decay_factor": 4.0, "floor": 0.1, "min_records": 4},
    },
    "solver": {"max_iter": 60, "keep_nonconverged": True},
    "analysis": {
        "ball_factor": 4.0,
        "comparison_radius": 2.0,
        "far_field_radii": [0.2, 0.3],
        "roundness_theta": 0.25,
    },
    "output": {"fields": "binary"},
    "seed": 0,
}

KINDS = ("emden_table", "disk_spike_sweep", "rect_spike_sweep")


def _merge(base, over):
    out = dict(base)
    for k, v in (over or {}).items():
        if k not in base:
            raise ConfigError(f"unknown config key {k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict):
            out[k] = _merge(base[k], v)
        else:
            out[k] = v
    return out


def materialize_config(raw: dict) -> dict:
    """Fill defaults and validate; the result is embedded in every report."""
    cfg = _merge(DEFAULTS, raw)
    if cfg["kind"] not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {cfg['kind']!r}")
    if cfg["kind"] == "emden_table":
        ps = cfg.get("p")
        if not isinstance(ps, (list, tuple)) or not ps:
            raise ConfigError("emden_table needs a nonempty list under 'p'")
        return cfg
    if not isinstance(cfg["p"], (int, float)) or cfg["p"] <= 1:
        raise ConfigError("p must be a number above 1")
    eps = cfg["eps_schedule"]
    if not eps:
        raise ConfigError("eps_schedule must be a nonempty decreasing list")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_schedule must be strictly decreasing")
    grids = cfg["grid_schedule"]
    if grids is None or len(grids) != len(eps):
        raise ConfigError("grid_schedule must match eps_schedule in length")
    if cfg["kind"] == "disk_spike_sweep":
        dom = cfg["domain"] or {"shape": "disk", "radius": UNIT_AREA_RADIUS}
        if dom.get("shape") != "disk":
            raise ConfigError("disk_spike_sweep needs a disk domain")
    else:
        dom = cfg["domain"] or {"shape": "rect", "Lx": 2.0, "Ly": 1.0}
        if dom.get("shape") != "rect":
            raise ConfigError("rect_spike_sweep needs a rect domain")
    cfg["domain"] = dom
    for key, val in (("emden_tol", cfg["tolerances"]["emden_tol"]),
                     ("solver_tol", cfg["tolerances"]["solver_tol"])):
        if val <= 0:
            raise ConfigError(f"tolerance {key} must be positive")
    if cfg["output"]["fields"] not in ("binary", "csv", "both", "none"):
        raise ConfigError("output.fields must be binary|csv|both|none")
    return cfg


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _pyify(obj):
    """Plain-python tree: numpy scalars unboxed, NaN mapped to None."""
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if np.isnan(x) else x
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w") as f:
        json.dump(_pyify(obj), f, sort_keys=True, indent=2)
        f.write("\n")


def _domain_for(cfg: dict, n: int):
    dom = cfg["domain"]
    if dom["shape"] == "disk":
        return disk_domain(dom["radius"], n)
    return rect_domain(dom["Lx"], dom["Ly"], n)


def run(raw_config: dict, out_dir) -> dict:
    """Execute a pipeline; writes the bundle and returns the summary dict."""
    cfg = materialize_config(raw_config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg["kind"] == "emden_table":
        return _run_emden_table(cfg, out)
    return _run_sweep(cfg, out)


def _run_emden_table(cfg: dict, out: Path) -> dict:
    rows = []
    for p in cfg["p"]:
        em = solve_emden(float(p), tol=cfg["tolerances"]["emden_tol"])
        rows.append([
            p, em.phi0, em.dphi1, em.I_pm1, em.I_p, em.I_pp1,
            abs(em.I_p + 2 * np.pi * em.dphi1),
            abs(em.I_pp1 - (p + 1) / (8 * np.pi) * em.I_p**2),
        ])
    write_csv(out / "emden_table.csv",
              ["p", "phi0", "dphi1", "I_pm1", "I_p", "I_pp1",
               "flux_identity_resid", "pohozaev_resid"],
              rows)
    summary = {"config": cfg, "rows": len(rows), "files": ["emden_table.csv"]}
    write_json(out / "summary.json", summary)
    return summary


def _run_sweep(cfg: dict, out: Path) -> dict:
    tol = cfg["tolerances"]
    em = solve_emden(cfg["p"], tol=tol["emden_tol"])
    eps_list = [float(e) for e in cfg["eps_schedule"]]
    domains = [_domain_for(cfg, int(n)) for n in cfg["grid_schedule"]]
    init = SpikeInit(
        centers=tuple(tuple(c) for c in cfg["initial_guess"]["centers"]),
        a=cfg["initial_guess"]["a"],
        b=cfg["initial_guess"]["b"],
    )
    scfg = SolverConfig(
        tol=tol["solver_tol"],
        max_iter=cfg["solver"]["max_iter"],
        keep_nonconverged=cfg["solver"]["keep_nonconverged"],
    )
    sweep = continuation_sweep(domains, em, eps_list, init, scfg)

    ana = cfg["analysis"]
    per_eps_records = [
        analyze_solution(s, em, ball_factor=ana["ball_factor"], R=ana["comparison_radius"])
        for s in sweep
    ]
    sequences = track_spikes(sweep, em, ball_factor=ana["ball_factor"],
                             R=ana["comparison_radius"])
    ccfg = ClassifyConfig(**tol["classify"])
    classifications = []
    for seq in sequences:
        if len(seq.records) >= ccfg.min_records or seq.vanished:
            c = classify(seq, em, ccfg)
            classifications.append({
                "label": c.label,
                "t_inf_estimate": c.t_inf_estimate,
                "rho_estimate": c.rho_estimate,
                "t_lower_bound": c.t_lower_bound,
                "t_lower_bound_ok": c.t_lower_bound_ok,
                "n_records": len(seq.records),
            })
        else:
            classifications.append({"label": "insufficient", "n_records": len(seq.records)})

    quant = quantization_report(sweep, em)
    round_rep = roundness(sweep[-1], per_eps_records[-1], ana["roundness_theta"])

    solve_rows = []
    ratio_rows = []
    for sol in sweep:
        row = {
            "eps": sol.eps, "n": sol.domain.nx, "converged": sol.converged,
            "iterations": sol.iterations, "residual": sol.residual,
            "v_max": sol.v_max, "h1_mass": sol.h1_mass, "h2_mass": sol.h2_mass,
            "peak_boundary_distance": sol.peak_boundary_distance(),
        }
        try:
            ps = recover_parameters(sol)
            row["alpha"] = ps.alpha
            row["lambda"] = ps.lam
            row["gamma"] = ps.gamma
            row["I_total"] = ps.I_total
            ratio_rows.append([sol.eps, abs(ps.alpha) / (ps.lam * np.log(ps.lam))])
        except Exception:
            row["alpha"] = None
            row["lambda"] = None
        solve_rows.append(row)

    far_rows = []
    for sol, recs in zip(sweep, per_eps_records):
        ff = far_field_check(sol, recs, em, radii=ana["far_field_radii"])
        for r, data in ff.items():
            if data.get("n_points", 0) > 0:
                far_rows.append([sol.eps, r, data["sup_rel"], data["mean_rel"]])

    # location constraint at the smallest eps: gradient of the point energy
    gf = green_fn(sweep[-1].domain)
    kr_summary = {}
    recs = per_eps_records[-1]
    if recs:
        ex = 2.0 / (em.p - 1.0)
        pts = [list(r.x) for r in recs]
        ms = [em.I_p * r.t ** (-ex) for r in recs]
        kcfg = KRConfig.of(pts, ms)
        grad = kr_gradient(gf, kcfg)
        kr_summary["grad_at_spikes"] = grad.tolist()
        kr_summary["grad_norm"] = float(np.abs(grad).max())
        if len(recs) == 1:
            crit = kr_critical(gf, kcfg, tol=1e-10)
            kr_summary["critical_point"] = crit.points.tolist()
            kr_summary["spike_to_critical_distance"] = float(
                np.hypot(*(np.array(pts[0]) - crit.points[0]))
            )

    files = []
    # per-spike trend tables
    for k, seq in enumerate(sequences):
        rows = [[r.eps, r.t, r.s * r.t, r.ball_mass_pm1, r.ball_mass_p]
                for r in seq.records]
        name = f"trend_spike{k}.csv"
        write_csv(out / name, ["eps", "t_n", "s_t", "mass_pm1", "mass_p"], rows)
        files.append(name)
    # radial section of the normalized rescaling at the smallest eps
    for k, rec in enumerate(per_eps_records[-1]):
        sol = sweep[-1]
        sc = solve_scale(sol.eps, em.dphi1, em.p)
        z, u, _ = normalize_rescale(sol, rec.x, sc, em, R=ana["comparison_radius"], n=129)
        mid = len(z) // 2
        wstar = reference_shape(em, np.abs(z))
        rows = [[z[j], u[mid, j], wstar[j]] for j in range(len(z))]
        name = f"profile_spike{k}.csv"
        write_csv(out / name, ["z", "u_n", "w_star"], rows)
        files.append(name)
    # quantization and far-field tables
    write_csv(out / "quantization.csv",
              ["eps", "h1_total", "h2_total", "converged"],
              [[r["eps"], r["h1_total"], r["h2_total"], int(r["converged"])]
               for r in quant["rows"]])
    files.append("quantization.csv")
    write_csv(out / "farfield.csv", ["eps", "r", "sup_rel", "mean_rel"], far_rows)
    files.append("farfield.csv")
    write_csv(out / "parameter_trend.csv", ["eps", "alpha_over_lam_loglam"], ratio_rows)
    files.append("parameter_trend.csv")
    # single-point energy level map for plotting
    files.append(_write_kr_levels(out, gf, sweep[-1].domain))
    # field dumps
    mode = cfg["output"]["fields"]
    if mode in ("binary", "both"):
        (out / "fields").mkdir(exist_ok=True)
        for i, sol in enumerate(sweep):
            name = f"fields/field_{i:03d}.pslb"
            write_field(out / name, sol.domain, sol.v, sol.eps, sol.p)
            files.append(name)
    if mode in ("csv", "both"):
        (out / "fields").mkdir(exist_ok=True)
        for i, sol in enumerate(sweep):
            name = f"fields/field_{i:03d}.csv"
            write_field_csv(out / name, sol.domain, sol.v)
            files.append(name)

    summary = {
        "config": cfg,
        "emden": {"p": em.p, "phi0": em.phi0, "dphi1": em.dphi1,
                  "I_pm1": em.I_pm1, "I_p": em.I_p, "I_pp1": em.I_pp1},
        "solves": solve_rows,
        "spikes_per_eps": [
            [{"x": list(r.x), "peak": r.peak, "t": r.t, "s_t": r.s * r.t,
              "mass_pm1": r.ball_mass_pm1, "mass_p": r.ball_mass_p,
              "profile_dist": r.profile_dist} for r in recs]
            for recs in per_eps_records
        ],
        "classification": classifications,
        "quantization": quant,
        "roundness": round_rep,
        "kirchhoff_routh": kr_summary,
        "files": files,
    }
    write_json(out / "summary.json", summary)
    return summary


def _write_kr_levels(out: Path, gf, domain, n: int = 101) -> str:
    """CSV map of the single-point energy H(q, q) over the domain."""
    X, Y = domain.nodes()
    xs = np.linspace(X.min(), X.max(), n)
    ys = np.linspace(Y.min(), Y.max(), n)
    rows = []
    for y in ys:
        for x in xs:
            if gf.contains((x, y)):
                rows.append([x, y, gf.reg_diag(np.array([x, y]))])
    write_csv(out / "kr_levels.csv", ["x", "y", "H"], rows)
    return "kr_levels.csv"
