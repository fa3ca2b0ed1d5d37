"""Renderers for the six figure kinds.

Each renderer takes a parsed FigureSpec and writes spec.out. Output is
deterministic for identical inputs: the Agg backend, a fixed dpi, a fixed
jitter seed, and no timestamp metadata in SVG files.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "gnodefigs"

import matplotlib.pyplot as plt
import numpy as np

from .io import read_columns, read_fixed_points, read_mixed, read_trial_traces
from .spec import FigureSpec

__all__ = ["render"]

_JITTER_SEED = 315

_CLASS_MARKERS = {
    # marker, facecolor ("open" = unfilled)
    "stable": ("o", True),
    "unstable": ("o", False),
    "saddle": ("s", False),
    "unknown": ("x", True),
}


def _save(fig, spec: FigureSpec):
    kwargs = {"dpi": spec.style["dpi"], "bbox_inches": "tight"}
    if spec.out.lower().endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(spec.out, **kwargs)
    plt.close(fig)


def _flow_field(spec: FigureSpec):
    cols = read_columns(spec.inputs["flow"],
                        ["y1", "y2", "v1", "v2", "speed"])
    fig, ax = plt.subplots(figsize=spec.style["figsize"])
    q = ax.quiver(cols["y1"], cols["y2"], cols["v1"], cols["v2"],
                  cols["speed"], cmap=spec.style["cmap"],
                  angles="xy", width=0.004)
    fig.colorbar(q, ax=ax, label="speed")

    traces_path = spec.inputs.get("trajectories")
    if traces_path:
        traces = read_trial_traces(traces_path)
        for tr in traces[: spec.style["max_trajectories"]]:
            ax.plot(tr[:, 0], tr[:, 1], color="0.3", lw=0.8, alpha=0.8,
                    zorder=2)

    fp_path = spec.inputs.get("fixed_points")
    if fp_path:
        for rec in read_fixed_points(fp_path):
            x, y = rec["location"][0], rec["location"][1]
            marker, filled = _CLASS_MARKERS.get(rec["class"],
                                                _CLASS_MARKERS["unknown"])
            if marker == "x":
                ax.scatter([x], [y], marker=marker, s=60, zorder=3,
                           color="tab:red", linewidths=1.4)
            else:
                ax.scatter([x], [y], marker=marker, s=60, zorder=3,
                           facecolors="tab:red" if filled else "none",
                           edgecolors="tab:red", linewidths=1.4)

    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_aspect("equal", adjustable="datalim")
    if spec.style["title"]:
        ax.set_title(spec.style["title"])
    return fig


def _abscissa_strip(spec: FigureSpec):
    rng = np.random.default_rng(_JITTER_SEED)
    fig, ax = plt.subplots(figsize=spec.style["figsize"])
    labels = []
    for i, (label, path) in enumerate(spec.inputs["series"]):
        values = [abs(rec["abscissa"]) for rec in read_fixed_points(path)
                  if rec["abscissa"] is not None]
        labels.append(label)
        if not values:
            continue
        x = i + rng.uniform(-0.18, 0.18, size=len(values))
        ax.scatter(x, values, s=18, alpha=0.75, edgecolors="none")
        ax.hlines(float(np.median(values)), i - 0.28, i + 0.28,
                  colors="black", lw=1.4, zorder=3)
    ax.set_xticks(range(len(labels)), labels)
    ax.set_ylabel(r"$|\mathrm{Re}\,\lambda_{\max}|$")
    if spec.style["log"]:
        ax.set_yscale("log")
    if spec.style["title"]:
        ax.set_title(spec.style["title"])
    return fig


def _eig_cloud(spec: FigureSpec):
    panels = spec.inputs["spectra"]
    w, h = spec.style["figsize"]
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(w * len(panels), h),
                             squeeze=False, sharex=True, sharey=True)
    for ax, (label, path) in zip(axes[0], panels):
        cols = read_columns(path, ["re", "im"])
        ax.scatter(cols["re"], cols["im"], s=6, alpha=0.6, edgecolors="none")
        ring = spec.style["ring"]
        if ring is not None:
            theta = np.linspace(0.0, 2.0 * np.pi, 256)
            ax.plot(ring * np.cos(theta), ring * np.sin(theta),
                    color="tab:red", lw=1.0, ls="--")
        ax.axhline(0.0, color="0.85", lw=0.6, zorder=0)
        ax.axvline(0.0, color="0.85", lw=0.6, zorder=0)
        ax.set_title(label)
        ax.set_xlabel(r"$\mathrm{Re}\,\lambda$")
        ax.set_aspect("equal", adjustable="box")
    axes[0][0].set_ylabel(r"$\mathrm{Im}\,\lambda$")
    if spec.style["title"]:
        fig.suptitle(spec.style["title"])
    return fig


def _loss_curves(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=spec.style["figsize"])
    show = spec.style["show"]
    cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (label, path) in enumerate(spec.inputs["runs"]):
        cols = read_columns(path, ["epoch", "train_loss", "val_loss"])
        color = cycle[i % len(cycle)]
        if show in ("both", "train"):
            ax.plot(cols["epoch"], cols["train_loss"], color=color,
                    ls="--", lw=1.0,
                    label=f"{label} (train)" if show == "both" else label)
        if show in ("both", "val"):
            ax.plot(cols["epoch"], cols["val_loss"], color=color,
                    ls="-", lw=1.4,
                    label=f"{label} (val)" if show == "both" else label)
    if spec.style["logy"]:
        ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(fontsize=8)
    if spec.style["title"]:
        ax.set_title(spec.style["title"])
    return fig


def _mse_grid(spec: FigureSpec):
    cols = read_mixed(spec.inputs["grid"],
                      numeric=["N", "tau", "best_mse"],
                      text=["family"])
    family_col = np.array(cols["family"])
    families = sorted(set(cols["family"]))
    ns = sorted(set(cols["N"]))
    taus = sorted(set(cols["tau"]))
    w, h = spec.style["figsize"]
    fig, axes = plt.subplots(1, len(families),
                             figsize=(w * len(families), h), squeeze=False)
    cmap = matplotlib.colormaps[spec.style["cmap"]].copy()
    cmap.set_bad("0.9")
    finite = cols["best_mse"][np.isfinite(cols["best_mse"])]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    last = None
    for ax, family in zip(axes[0], families):
        grid = np.full((len(ns), len(taus)), np.nan)
        for i, n in enumerate(ns):
            for j, tau in enumerate(taus):
                sel = ((family_col == family)
                       & (cols["N"] == n) & (cols["tau"] == tau))
                vals = cols["best_mse"][sel]
                vals = vals[np.isfinite(vals)]
                if vals.size:
                    grid[i, j] = vals.min()
        last = ax.imshow(np.ma.masked_invalid(grid), cmap=cmap,
                         origin="lower", aspect="auto",
                         vmin=vmin, vmax=vmax)
        ax.set_xticks(range(len(taus)), [f"{t:g}" for t in taus])
        ax.set_yticks(range(len(ns)), [f"{n:g}" for n in ns])
        ax.set_xlabel(r"$\tau$ (s)")
        ax.set_title(family)
    axes[0][0].set_ylabel("N")
    if last is not None:
        fig.colorbar(last, ax=list(axes[0]), label="best MSE", shrink=0.85)
    if spec.style["title"]:
        fig.suptitle(spec.style["title"])
    return fig


def _critical_curve(spec: FigureSpec):
    cols = read_columns(spec.inputs["curve"], ["sigma_b", "sigma_w_star", "L"])
    fig, ax = plt.subplots(figsize=spec.style["figsize"])
    for depth in sorted(set(cols["L"])):
        sel = cols["L"] == depth
        order = np.argsort(cols["sigma_b"][sel])
        ax.plot(cols["sigma_b"][sel][order], cols["sigma_w_star"][sel][order],
                marker=".", ms=4, label=f"L = {depth:g}")
    ax.set_xlabel(r"$\sigma_b$")
    ax.set_ylabel(r"$\sigma_w^*$")
    ax.legend(fontsize=8)
    if spec.style["title"]:
        ax.set_title(spec.style["title"])
    return fig


_RENDERERS = {
    "flow-field": _flow_field,
    "abscissa-strip": _abscissa_strip,
    "eig-cloud": _eig_cloud,
    "loss-curves": _loss_curves,
    "mse-grid": _mse_grid,
    "critical-curve": _critical_curve,
}


def render(spec: FigureSpec) -> str:
    """Render one figure and return the output path."""
    fig = _RENDERERS[spec.kind](spec)
    _save(fig, spec)
    return spec.out
