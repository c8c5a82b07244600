"""Damped Newton solver for -eps^2 Lap(v) = [v - 1]_+^p with v = 0 on the wall.

The Jacobian -eps^2 Lap - p [v-1]_+^{p-1} is continuous but only
semismooth across the free boundary {v = 1}, so full steps are guarded by
an Armijo cut on the residual max-norm with a Picard sweep as fallback.
Solutions are returned as immutable records; a run that exhausts its
budget comes back flagged, never silently raised away.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .emden import EmdenSolution, eval_phi
from .errors import NegativeUndershoot, NonConvergence, ZeroPlasma
from .grid import GridDomain, integrate, neg_laplacian, restrict_to
from .profiles import DYProfile
from .scales import solve_scale


@dataclass(frozen=True)
class SolverConfig:
    """Newton iteration knobs; defaults suit desk-scale grids."""

    tol: float = 1e-10
    max_iter: int = 60
    armijo: float = 0.25
    tau_min: float = 1e-6
    picard_fallback: bool = True
    undershoot_tol: float = 1e-12
    keep_nonconverged: bool = True


@dataclass(frozen=True)
class SpikeInit:
    """Model-profile superposition at the given centers with levels (a, b)."""

    centers: tuple[tuple[float, float], ...]
    a: float = 1.0
    b: float = 0.0


@dataclass(frozen=True)
class GridSolution:
    """Converged (or best-effort) nodal field with its diagnostics."""

    domain: GridDomain
    p: float
    eps: float
    v: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    converged: bool
    theta: float
    h1_mass: float
    h2_mass: float

    @property
    def v_max(self) -> float:
        return float(self.v.max())

    def plasma_mask(self) -> np.ndarray:
        return self.v > 1.0

    def peak_boundary_distance(self) -> float:
        """Distance of the global maximizer from the wall (max-principle audit)."""
        i, j = np.unravel_index(int(np.argmax(self.v)), self.v.shape)
        X, Y = self.domain.nodes()
        return self.domain.boundary_distance(float(X[i, j]), float(Y[i, j]))


@dataclass(frozen=True)
class ParameterSet:
    """Back-mapped parameters of the constrained formulations."""

    alpha: float
    lam: float
    gamma: float
    I_total: float
    q: float


def spike_superposition(
    domain: GridDomain, emden: EmdenSolution, eps: float, init: SpikeInit
) -> np.ndarray:
    """Initial field: one truncated model bump per center, glued to zero.

    Each bump carries an Emden core matched to a logarithmic shell that
    ends at the center's clearance radius (half the distance to the nearest
    other center, capped by the wall distance).
    """
    X, Y = domain.nodes()
    v = np.zeros((domain.ny, domain.nx))
    centers = [np.asarray(c, dtype=float) for c in init.centers]
    jump = init.a - init.b
    for k, c in enumerate(centers):
        rho = domain.boundary_distance(c[0], c[1])
        for l, other in enumerate(centers):
            if l != k:
                rho = min(rho, 0.5 * float(np.hypot(*(c - other))))
        sc = solve_scale(eps, emden.dphi1, emden.p, jump=jump, outer_radius=rho)
        amp = (eps / sc.s) ** (2.0 / (emden.p - 1.0))
        r = np.hypot(X - c[0], Y - c[1])
        core = r <= sc.s
        shell = (r > sc.s) & (r < rho)
        bump = np.zeros_like(v)
        bump[core] = init.a + amp * eval_phi(emden, r[core] / sc.s)
        bump[shell] = init.b + jump * np.log(r[shell] / rho) / np.log(sc.s / rho)
        v += bump
    v[~domain.interior] = 0.0
    return np.maximum(v, 0.0)


def profile_field(domain: GridDomain, prof: DYProfile) -> np.ndarray:
    """Evaluate a centered model profile on the grid (disk domains)."""
    X, Y = domain.nodes()
    v = np.zeros((domain.ny, domain.nx))
    r = np.hypot(X, Y)[domain.interior]
    v[domain.interior] = prof.value_at_radius(np.minimum(r, prof.R2))
    return v


def initial_field(
    domain: GridDomain, emden: EmdenSolution, eps: float, init
) -> np.ndarray:
    """Resolve an initial-guess spec: zero field, superposition, or raw array."""
    if init is None or (isinstance(init, str) and init == "zero"):
        return np.zeros((domain.ny, domain.nx))
    if isinstance(init, SpikeInit):
        return spike_superposition(domain, emden, eps, init)
    if isinstance(init, DYProfile):
        return profile_field(domain, init)
    arr = np.asarray(init, dtype=float)
    if arr.shape != (domain.ny, domain.nx):
        raise NonConvergence(
            f"initial field shape {arr.shape} does not match grid "
            f"({domain.ny}, {domain.nx})"
        )
    return arr.copy()


def solve(
    domain: GridDomain,
    emden: EmdenSolution,
    eps: float,
    init="zero",
    cfg: SolverConfig | None = None,
) -> GridSolution:
    """Damped Newton from the given initial field; returns a flagged record."""
    cfg = cfg or SolverConfig()
    p = emden.p
    L = neg_laplacian(domain)
    lap_lu = spla.splu((eps**2 * L).tocsc())

    mask = domain.interior
    v = initial_field(domain, emden, eps, init)[mask]

    def residual_of(u):
        return eps**2 * (L @ u) - np.maximum(u - 1.0, 0.0) ** p

    F = residual_of(v)
    res = float(np.abs(F).max())
    best_v, best_res, it = v.copy(), res, 0

    for it in range(1, cfg.max_iter + 1):
        if res <= cfg.tol:
            break
        w = np.maximum(v - 1.0, 0.0)
        J = (eps**2 * L - sp.diags(p * w ** (p - 1.0))).tocsc()
        try:
            step = spla.splu(J).solve(-F)
        except RuntimeError:
            step = None  # singular Jacobian: fall through to Picard
        accepted = False
        if step is not None:
            tau = 1.0
            while tau >= cfg.tau_min:
                vn = v + tau * step
                if vn.min() < -cfg.undershoot_tol - 1e-15:
                    tau *= 0.5
                    continue
                Fn = residual_of(vn)
                rn = float(np.abs(Fn).max())
                if rn <= (1.0 - cfg.armijo * tau) * res:
                    v, F, res = vn, Fn, rn
                    accepted = True
                    break
                tau *= 0.5
        if not accepted:
            if not cfg.picard_fallback:
                raise NegativeUndershoot(
                    "damping floor reached without an admissible step",
                )
            v = lap_lu.solve(np.maximum(v - 1.0, 0.0) ** p)
            F = residual_of(v)
            res = float(np.abs(F).max())
        if res < best_res:
            best_v, best_res = v.copy(), res

    converged = res <= cfg.tol
    if not converged:
        v, res = best_v, best_res
        if not cfg.keep_nonconverged:
            raise NonConvergence(
                f"residual {res:.3e} above {cfg.tol:.1e} after {it} iterations",
                diagnostics={"residual": res, "iterations": it},
            )

    V = np.zeros((domain.ny, domain.nx))
    V[mask] = v
    sc = solve_scale(eps, emden.dphi1, p)
    h1 = integrate(domain, np.maximum(V - 1.0, 0.0) ** (p - 1.0)) / eps**2
    h2 = sc.theta * integrate(domain, np.maximum(V - 1.0, 0.0) ** p) / eps**2
    return GridSolution(
        domain=domain, p=p, eps=float(eps), v=V, residual=res, iterations=it,
        converged=converged, theta=sc.theta, h1_mass=h1, h2_mass=h2,
    )


def continuation_sweep(
    domains,
    emden: EmdenSolution,
    eps_list,
    init,
    cfg: SolverConfig | None = None,
) -> list[GridSolution]:
    """Solve along decreasing eps, warm-starting each step from the last.

    `domains` is either one grid or a per-eps list; changing grids mid-sweep
    re-interpolates the previous solution, which keeps the spike cores
    resolved as they shrink.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise NonConvergence("eps schedule must be strictly decreasing")
    if isinstance(domains, GridDomain):
        domains = [domains] * len(eps_list)
    if len(domains) != len(eps_list):
        raise NonConvergence("one grid per eps value required")

    cfg = cfg or SolverConfig()
    out: list[GridSolution] = []
    guess = init
    prev: GridSolution | None = None
    for k, (dom, eps) in enumerate(zip(domains, eps_list)):
        if prev is not None:
            guess = prev.v if prev.domain is dom else restrict_to(prev.domain, prev.v, dom)
        sol = solve(dom, emden, eps, guess, cfg)
        if not sol.converged and not cfg.keep_nonconverged:
            raise NonConvergence(
                f"sweep failed at index {k} (eps = {eps})",
                diagnostics={"index": k, "eps": eps, "residual": sol.residual},
            )
        out.append(sol)
        prev = sol
    return out


def recover_parameters(sol: GridSolution) -> ParameterSet:
    """Back out (alpha, lambda, gamma, I) from the p-mass of the solution."""
    p = sol.p
    pmass = integrate(sol.domain, np.maximum(sol.v - 1.0, 0.0) ** p)
    if pmass <= 0.0:
        raise ZeroPlasma("plasma set {v > 1} is empty")
    alpha_abs = pmass ** (-1.0 / p)
    lam = 1.0 / (sol.eps**2 * alpha_abs ** (p - 1.0))
    q = p / (p - 1.0)
    return ParameterSet(
        alpha=-alpha_abs,
        lam=lam,
        gamma=lam ** (1.0 / (p - 1.0)) * (-alpha_abs),
        I_total=lam**q,
        q=q,
    )


def psi_field(sol: GridSolution, params: ParameterSet) -> np.ndarray:
    """Stream-like field psi = |alpha| v / lambda of the constrained form."""
    return abs(params.alpha) * sol.v / params.lam


def constraint_defect(sol: GridSolution, params: ParameterSet) -> float:
    """Defect of the unit-mass constraint on [alpha + lambda psi]_+^p."""
    psi = psi_field(sol, params)
    val = integrate(sol.domain, np.maximum(params.alpha + params.lam * psi, 0.0) ** sol.p)
    return abs(val - 1.0)


def mesh_refinement_errors(
    emden: EmdenSolution, eps: float, prof: DYProfile, sizes, cfg=None
) -> list[float]:
    """Max-norm distance between solver output and the model, per grid size."""
    from .grid import disk_domain

    errs = []
    for n in sizes:
        dom = disk_domain(prof.R2, n)
        sol = solve(dom, emden, eps, prof, cfg)
        ref = profile_field(dom, prof)
        errs.append(float(np.abs(sol.v - ref)[dom.interior].max()))
    return errs
