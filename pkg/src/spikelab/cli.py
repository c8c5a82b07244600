"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.
All numeric output goes through json/CSV writers with plain float repr, so
identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiment
from .emden import solve_emden
from .entire import make_entire, masses, rescale, solve_onedim
from .errors import ConfigError, NonConvergence, NoRootInRange, SpikeLabError
from .green import KRConfig, green_fn, kr_critical, kr_gradient, kr_hamiltonian
from .grid import disk_domain, read_field, rect_domain, write_field, write_field_csv
from .profiles import build_profile, constraint_parameters, profile_masses
from .scales import scale_sweep, solve_scale
from .solver import SolverConfig, SpikeInit, continuation_sweep, recover_parameters
from .spikes import (
    ClassifyConfig,
    analyze_solution,
    classify,
    quantization_report,
    roundness,
    track_spikes,
)

VALIDATION_EXIT = 2
NUMERICAL_EXIT = 3


def _emit(args, obj) -> None:
    text = json.dumps(experiment._pyify(obj), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)


def _parse_points(text: str) -> list[tuple[float, float]]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        xy = chunk.split(",")
        if len(xy) != 2:
            raise ConfigError(f"bad point {chunk!r}, expected 'x,y'")
        pts.append((float(xy[0]), float(xy[1])))
    if not pts:
        raise ConfigError("no points given")
    return pts


def _domain_from_args(args, n: int):
    if args.domain == "disk":
        return disk_domain(args.radius, n)
    return rect_domain(args.lx, args.ly, n)


def cmd_emden(args) -> int:
    sol = solve_emden(args.p, tol=args.tol, samples=args.samples)
    _emit(args, {
        "p": sol.p, "phi0": sol.phi0, "dphi1": sol.dphi1,
        "I_pm1": sol.I_pm1, "I_p": sol.I_p, "I_pp1": sol.I_pp1, "tol": sol.tol,
    })
    if args.table:
        path = Path(args.out) / args.table
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write("r,phi,dphi\n")
            for r, phi, dphi in zip(sol.r, sol.phi, sol.dphi):
                f.write(f"{float(r)!r},{float(phi)!r},{float(dphi)!r}\n")
        if not args.quiet:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_entire(args) -> int:
    em = solve_emden(args.p, tol=args.tol)
    w = make_entire(em, args.radius)
    if args.scale != 1.0:
        w = rescale(w, args.scale)
    b_pm1, b_p, b_pp1 = masses(w)
    _emit(args, {"R_p": w.R_p, "beta_pm1": b_pm1, "beta_p": b_p, "beta_pp1": b_pp1})
    return 0


def cmd_onedim(args) -> int:
    sol = solve_onedim(args.p, args.a, tol=args.tol)
    _emit(args, {"t0": sol.t0, "tail_slope": sol.tail_slope})
    if args.samples_file:
        t = np.linspace(-2 * sol.t0, 2 * sol.t0, args.samples)
        path = Path(args.out) / args.samples_file
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write("t,u\n")
            for ti, ui in zip(t, sol.u(t)):
                f.write(f"{float(ti)!r},{float(ui)!r}\n")
        if not args.quiet:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_scales(args) -> int:
    em = solve_emden(args.p, tol=1e-10)
    eps = [float(e) for e in args.eps.split(",") if e.strip()]
    rows = scale_sweep(eps, em.dphi1, args.p)
    sys.stdout.write("eps,s,theta\n")
    for sc in rows:
        sys.stdout.write(f"{sc.eps!r},{sc.s!r},{sc.theta!r}\n")
    return 0


def cmd_profile(args) -> int:
    em = solve_emden(args.p, tol=1e-10)
    prof = build_profile(em, args.eps, a=args.a, b=args.b)
    out = {
        "s_eps": prof.s_eps,
        "masses": {
            "pm1": profile_masses(prof, (prof.p - 1) / prof.p),
            "p": profile_masses(prof, 1.0),
            "pp1": profile_masses(prof, (prof.p + 1) / prof.p),
        },
    }
    if args.a == 1.0 and args.b == 0.0:
        cp = constraint_parameters(prof)
        out["alpha_abs"] = cp.alpha_abs
        out["lambda"] = cp.lam
        out["s_closed_form"] = cp.s_closed_form
    _emit(args, out)
    if args.table:
        r = np.linspace(0.0, prof.R2, args.samples)
        path = Path(args.out) / args.table
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write("r,U\n")
            for ri, ui in zip(r, prof.value_at_radius(r)):
                f.write(f"{float(ri)!r},{float(ui)!r}\n")
        if not args.quiet:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    em = solve_emden(args.p, tol=1e-10)
    eps_list = [float(e) for e in args.eps.split(",") if e.strip()]
    grids = [int(g) for g in args.grid.split(",") if g.strip()]
    if len(grids) == 1:
        grids = grids * len(eps_list)
    if len(grids) != len(eps_list):
        raise ConfigError("--grid must give one size or one per eps")
    domains = [_domain_from_args(args, n) for n in grids]
    init = SpikeInit(centers=tuple(_parse_points(args.spikes))) if args.spikes else "zero"
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter,
                       keep_nonconverged=not args.strict)
    sols = continuation_sweep(domains, em, eps_list, init, cfg)
    rows = []
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, sol in enumerate(sols):
        row = {
            "eps": sol.eps, "converged": sol.converged, "iters": sol.iterations,
            "residual": sol.residual, "v_max": sol.v_max,
            "H1_mass": sol.h1_mass, "H2_mass": sol.h2_mass,
        }
        try:
            ps = recover_parameters(sol)
            row["alpha"] = ps.alpha
            row["lambda"] = ps.lam
        except SpikeLabError:
            row["alpha"] = None
            row["lambda"] = None
        rows.append(row)
        if args.dump in ("bin", "both"):
            write_field(outdir / f"field_{i:03d}.pslb", sol.domain, sol.v, sol.eps, sol.p)
        if args.dump in ("csv", "both"):
            write_field_csv(outdir / f"field_{i:03d}.csv", sol.domain, sol.v)
    _emit(args, rows)
    if not all(r["converged"] for r in rows) and args.strict:
        return NUMERICAL_EXIT
    return 0


def cmd_analyze(args) -> int:
    from .grid import integrate
    from .solver import GridSolution

    fields = [read_field(p) for p in args.fields]
    fields.sort(key=lambda t: -t[2])  # decreasing eps
    em = solve_emden(fields[0][3], tol=1e-10)
    sweep = []
    for dom, v, eps, p in fields:
        sc = solve_scale(eps, em.dphi1, em.p)
        h1 = integrate(dom, np.maximum(v - 1, 0) ** (p - 1)) / eps**2
        h2 = sc.theta * integrate(dom, np.maximum(v - 1, 0) ** p) / eps**2
        sweep.append(GridSolution(domain=dom, p=p, eps=eps, v=v, residual=0.0,
                                  iterations=0, converged=True, theta=sc.theta,
                                  h1_mass=h1, h2_mass=h2))
    ccfg = ClassifyConfig(drift=args.drift, decay_factor=args.decay_factor,
                          floor=args.floor)
    seqs = track_spikes(sweep, em)
    report = {
        "spikes": [
            [{"x": list(r.x), "peak": r.peak, "t_n": r.t,
              "mass_pm1": r.ball_mass_pm1, "mass_p": r.ball_mass_p,
              "profile_dist": r.profile_dist} for r in seq.records]
            for seq in seqs
        ],
        "classification": [],
        "quantization": quantization_report(sweep, em),
        "roundness": roundness(sweep[-1], analyze_solution(sweep[-1], em), args.theta_round),
    }
    for seq in seqs:
        if len(seq.records) >= ccfg.min_records or seq.vanished:
            c = classify(seq, em, ccfg)
            report["classification"].append({"label": c.label,
                                             "t_inf_estimate": c.t_inf_estimate})
        else:
            report["classification"].append({"label": "insufficient"})
    _emit(args, report)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    experiment.write_json(outdir / "analysis.json", report)
    for k, seq in enumerate(seqs):
        rows = [[r.eps, r.t, r.s * r.t, r.ball_mass_pm1, r.ball_mass_p]
                for r in seq.records]
        experiment.write_csv(outdir / f"trend_spike{k}.csv",
                             ["eps", "t_n", "s_t", "mass_pm1", "mass_p"], rows)
    return 0


def cmd_kr(args) -> int:
    if args.domain == "disk":
        gf = green_fn(("disk", (args.radius,)))
    else:
        gf = green_fn(("rect", (args.lx, args.ly)))
    pts = _parse_points(args.points)
    ms = [float(m) for m in args.masses.split(";")] if args.masses else None
    cfg = KRConfig.of(pts, ms)
    out = {
        "H": kr_hamiltonian(gf, cfg),
        "grad": kr_gradient(gf, cfg).tolist(),
    }
    if args.find_critical:
        crit = kr_critical(gf, cfg, tol=args.tol)
        out["critical_points"] = crit.points.tolist()
    _emit(args, out)
    if args.levelset:
        path = Path(args.out)
        path.mkdir(parents=True, exist_ok=True)
        dom = (disk_domain(args.radius, 41) if args.domain == "disk"
               else rect_domain(args.lx, args.ly, 41))
        experiment._write_kr_levels(path, gf, dom, n=args.levelset)
        if not args.quiet:
            print(f"wrote {path / 'kr_levels.csv'}", file=sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    with open(args.config) as f:
        raw = json.load(f)
    summary = experiment.run(raw, args.out)
    if not args.quiet:
        print(f"wrote {Path(args.out) / 'summary.json'}", file=sys.stderr)
    solves = summary.get("solves", [])
    if solves and not all(r["converged"] for r in solves) and args.strict:
        return NUMERICAL_EXIT
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spikelab",
                                 description="free-boundary plasma spike laboratory")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--quiet", action="store_true")
    ap.add_argument("--threads", type=int, default=0,
                    help="cap BLAS/OpenMP threads (0 leaves the environment alone)")
    sub = ap.add_subparsers(dest="command", required=True)

    q = sub.add_parser("emden", help="radial profile and its disk integrals")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--samples", type=int, default=100_001)
    q.add_argument("--table", help="also write the radial table CSV here")
    q.set_defaults(func=cmd_emden)

    q = sub.add_parser("entire", help="entire-solution masses")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--radius", type=float, required=True)
    q.add_argument("--scale", type=float, default=1.0)
    q.add_argument("--tol", type=float, default=1e-10)
    q.set_defaults(func=cmd_entire)

    q = sub.add_parser("onedim", help="one-dimensional infinite-mass profile")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--samples-file")
    q.add_argument("--samples", type=int, default=1001)
    q.set_defaults(func=cmd_onedim)

    q = sub.add_parser("scales", help="core radius and amplification per eps")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--eps", required=True, help="comma-separated list")
    q.set_defaults(func=cmd_scales)

    q = sub.add_parser("profile", help="single-spike model profile")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--a", type=float, default=1.0)
    q.add_argument("--b", type=float, default=0.0)
    q.add_argument("--table", help="also write radial samples CSV here")
    q.add_argument("--samples", type=int, default=2001)
    q.set_defaults(func=cmd_profile)

    q = sub.add_parser("solve", help="continuation sweep of the nonlinear problem")
    q.add_argument("--domain", choices=("disk", "rect"), required=True)
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--eps", required=True, help="comma-separated decreasing list")
    q.add_argument("--radius", type=float, default=1.0 / np.sqrt(np.pi))
    q.add_argument("--lx", type=float, default=2.0)
    q.add_argument("--ly", type=float, default=1.0)
    q.add_argument("--spikes", help="initial centers 'x1,y1;x2,y2'")
    q.add_argument("--grid", default="161", help="node count(s), one or per eps")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--max-iter", type=int, default=60)
    q.add_argument("--dump", choices=("none", "bin", "csv", "both"), default="none")
    q.add_argument("--strict", action="store_true",
                   help="exit 3 if any step fails to converge")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("analyze", help="spike taxonomy of dumped fields")
    q.add_argument("--fields", nargs="+", required=True)
    q.add_argument("--drift", type=float, default=0.10)
    q.add_argument("--decay-factor", type=float, default=4.0)
    q.add_argument("--floor", type=float, default=0.1)
    q.add_argument("--theta-round", type=float, default=0.25)
    q.set_defaults(func=cmd_analyze)

    q = sub.add_parser("kr", help="point-configuration energy and critical points")
    q.add_argument("--domain", choices=("disk", "rect"), required=True)
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--lx", type=float, default=2.0)
    q.add_argument("--ly", type=float, default=1.0)
    q.add_argument("--points", required=True, help="'x1,y1;x2,y2;...'")
    q.add_argument("--masses", help="'m1;m2;...'")
    q.add_argument("--find-critical", action="store_true")
    q.add_argument("--levelset", type=int, default=0,
                   help="write kr_levels.csv on an n x n sampling")
    q.add_argument("--tol", type=float, default=1e-10)
    q.set_defaults(func=cmd_kr)

    q = sub.add_parser("experiment", help="run a config-described pipeline")
    q.add_argument("config")
    q.add_argument("--strict", action="store_true")
    q.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT
    except (NonConvergence, NoRootInRange) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except SpikeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT


if __name__ == "__main__":
    sys.exit(main())
