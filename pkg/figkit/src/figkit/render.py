"""The five figure kinds rendered from sweep-bundle files.

Every renderer writes the figure plus a sidecar `<out>.data.csv` holding
exactly the table it plotted, byte-for-byte as read; re-rendering from the
sidecar reproduces the sidecar bit-identically.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schemas import SchemaMismatch, Table, read_summary, read_table, require_keys

matplotlib.rcParams["svg.hashsalt"] = "figkit"

KINDS = ("profile", "trends", "quantization", "roundness", "kr-levels")


def _save(fig, out: Path) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".svg":
        fig.savefig(out, metadata={"Date": None})
    elif out.suffix == ".pdf":
        fig.savefig(out, metadata={"CreationDate": None})
    else:
        raise SchemaMismatch(f"unsupported output format {out.suffix!r} (use .svg or .pdf)")
    plt.close(fig)


def _sidecar(table: Table, out: Path) -> None:
    path = Path(str(out) + ".data.csv")
    with open(path, "w") as f:
        f.write(",".join(table.header) + "\n")
        for ln in table.raw_lines:
            f.write(ln + "\n")


def render_profile(inputs: list, out) -> None:
    """Overlay of the normalized rescaling section and its limit shape."""
    table = read_table(inputs[0], required=("z", "u_n", "w_star"))
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(table.columns["z"], table.columns["u_n"], lw=1.4, label="rescaled section")
    ax.plot(table.columns["z"], table.columns["w_star"], "--", lw=1.2,
            label="limit profile")
    ax.axhline(0.0, color="0.8", lw=0.6)
    ax.set_xlabel("z")
    ax.set_ylabel("u(z)")
    ax.legend(frameon=False)
    _save(fig, Path(out))
    _sidecar(table, Path(out))


def render_trends(inputs: list, out) -> None:
    """Sharpness and core-radius trends along the sweep (log-log right panel)."""
    table = read_table(inputs[0], required=("eps", "t_n", "s_t"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    ax1.plot(table.columns["eps"], table.columns["t_n"], "o-", lw=1.2)
    ax1.set_xscale("log")
    ax1.invert_xaxis()
    ax1.set_xlabel("eps")
    ax1.set_ylabel("t")
    ax2.loglog(table.columns["eps"], table.columns["s_t"], "o-", lw=1.2)
    ax2.invert_xaxis()
    ax2.set_xlabel("eps")
    ax2.set_ylabel("s t")
    fig.tight_layout()
    _save(fig, Path(out))
    _sidecar(table, Path(out))


def render_quantization(inputs: list, out) -> None:
    """Total weighted mass against the integer levels of the unit mass."""
    if len(inputs) < 2:
        raise SchemaMismatch("quantization needs the table and summary.json")
    table = read_table(inputs[0], required=("eps", "h1_total"))
    summary = read_summary(inputs[1])
    i_pm1 = require_keys(summary, inputs[1], "quantization", "I_pm1")
    n_est = require_keys(summary, inputs[1], "quantization", "spike_count")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(table.columns["eps"], table.columns["h1_total"], "o-", lw=1.2,
            label="measured total")
    levels = max(int(n_est), 1) + 1
    for k in range(1, levels + 1):
        ax.axhline(k * i_pm1, color="0.75", lw=0.8, ls=":")
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("eps")
    ax.set_ylabel("weighted mass total")
    ax.legend(frameon=False)
    _save(fig, Path(out))
    _sidecar(table, Path(out))


def render_roundness(inputs: list, out) -> None:
    """Plasma nodes with the two containment circles around each spike."""
    if len(inputs) < 2:
        raise SchemaMismatch("roundness needs a field CSV and summary.json")
    table = read_table(inputs[0], required=("x", "y", "v"))
    summary = read_summary(inputs[1])
    spikes = require_keys(summary, inputs[1], "roundness", "spikes")
    theta = require_keys(summary, inputs[1], "roundness", "theta")
    xs, ys, vs = table.columns["x"], table.columns["y"], table.columns["v"]
    px = [x for x, v in zip(xs, vs) if v > 1.0]
    py = [y for y, v in zip(ys, vs) if v > 1.0]
    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    ax.scatter(xs[:: max(1, len(xs) // 20000)], ys[:: max(1, len(ys) // 20000)],
               s=0.3, c="0.9")
    ax.scatter(px, py, s=0.8, c="tab:red", label="plasma nodes")
    for sp in spikes:
        cx, cy = sp["x"]
        st = sp["st"]
        for fac, style in (((1 - theta), "-"), ((1 + theta), "--")):
            circle = plt.Circle((cx, cy), fac * st, fill=False, lw=1.0,
                                ls=style, color="tab:blue")
            ax.add_patch(circle)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    _save(fig, Path(out))
    _sidecar(table, Path(out))


def render_kr_levels(inputs: list, out) -> None:
    """Level sets of the single-point location energy."""
    table = read_table(inputs[0], required=("x", "y", "H"))
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    cs = ax.tricontourf(table.columns["x"], table.columns["y"],
                        table.columns["H"], levels=21)
    ax.tricontour(table.columns["x"], table.columns["y"], table.columns["H"],
                  levels=21, colors="k", linewidths=0.3)
    fig.colorbar(cs, ax=ax, label="H(q,q)")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    _save(fig, Path(out))
    _sidecar(table, Path(out))


RENDERERS = {
    "profile": render_profile,
    "trends": render_trends,
    "quantization": render_quantization,
    "roundness": render_roundness,
    "kr-levels": render_kr_levels,
}


def render(kind: str, inputs: list, out) -> None:
    if kind not in RENDERERS:
        raise SchemaMismatch(f"unknown figure kind {kind!r}; choices: {KINDS}")
    if not inputs:
        raise SchemaMismatch("no input files given")
    RENDERERS[kind](inputs, out)
