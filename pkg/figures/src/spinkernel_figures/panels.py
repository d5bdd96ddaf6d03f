"""One renderer per figure id.

Each renderer takes (manifest_path, manifest, out_base) and returns the
list of files written.  Inputs come exclusively from pipeline artifacts;
the renderers only group, scale and draw.
"""

from __future__ import annotations

import numpy as np
import matplotlib.pyplot as plt

from .io import SchemaError, artifact_path, gram_table, read_csv, read_json
from .style import MODEL_COLORS, apply_style, save_twin


def _hash(manifest):
    return manifest["config_hash"]


def _art(manifest, key):
    try:
        return manifest["artifacts"][key]
    except KeyError:
        raise SchemaError(f"manifest has no {key!r} artifact")


def fig2(manifest_path, manifest, out_base):
    """Nearest-neighbor fidelity scans with dip markers, one curve per N."""
    apply_style()
    table = read_csv(artifact_path(manifest_path, _art(manifest, "scan")),
                     _hash(manifest), ["N", "x", "fidelity", "is_argmin"])
    n_col = table.column("N", int)
    x = table.column("x")
    f = table.column("fidelity")
    flag = table.column("is_argmin", int)
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    for n in sorted(set(n_col)):
        xs = [xi for xi, ni in zip(x, n_col) if ni == n]
        fs = [fi for fi, ni in zip(f, n_col) if ni == n]
        ax.plot(xs, fs, label=f"N={n}")
        dip = [(xi, fi) for xi, fi, ni, fl in zip(x, f, n_col, flag)
               if ni == n and fl]
        if dip:
            ax.plot(*dip[0], "v", ms=7, color=ax.lines[-1].get_color())
    ax.set_xlabel(table.meta.get("control", "x"))
    ax.set_ylabel("F(x, x+dx)")
    ax.legend()
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig3(manifest_path, manifest, out_base):
    """Signed decision functions next to their kernel heat maps."""
    apply_style()
    decisions = _art(manifest, "decision")
    grams = _art(manifest, "gram")
    sizes = sorted(decisions, key=int)
    fig, axes = plt.subplots(len(sizes), 2,
                             figsize=(7.0, 2.6 * len(sizes)), squeeze=False)
    for row, n in enumerate(sizes):
        table = read_csv(artifact_path(manifest_path, decisions[n]),
                         _hash(manifest), ["N", "x", "d"])
        ax = axes[row][0]
        ax.plot(table.column("x"), table.column("d"), label="d(x)")
        if "d_sampled" in table.columns and table.columns["d_sampled"]:
            ax.plot(table.column("x"), table.column("d_sampled"), "--",
                    label="d(x), sampled")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_ylabel(f"N={n}\nd(x)")
        ax.legend(fontsize=7)
        labels, rows, meta = gram_table(
            artifact_path(manifest_path, grams[n]), _hash(manifest))
        im = axes[row][1].imshow(rows, vmin=0.0, vmax=1.0, origin="lower",
                                 cmap="viridis")
        axes[row][1].set_title(f"kernel ({meta.get('kind', '?')})",
                               fontsize=8)
        fig.colorbar(im, ax=axes[row][1], shrink=0.8)
    axes[-1][0].set_xlabel("control parameter")
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig4(manifest_path, manifest, out_base):
    """Similarities to the two dominant SVs and their balance point."""
    apply_style()
    midpoints = _art(manifest, "midpoint")
    n = sorted(midpoints, key=int)[-1]
    table = read_csv(artifact_path(manifest_path, midpoints[n]),
                     _hash(manifest), ["x", "sim_left", "sim_right"])
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(table.column("x"), table.column("sim_left"),
            label="f(x_L, x)")
    ax.plot(table.column("x"), table.column("sim_right"), "--",
            label="f(x_R, x)")
    for key, ls in (("x_left", ":"), ("x_right", ":"), ("x_mid", "-.")):
        if key in table.meta:
            ax.axvline(float(table.meta[key]), color="k", ls=ls, lw=0.8)
    ax.set_xlabel("control parameter")
    ax.set_ylabel("similarity to dominant SV")
    ax.set_title(f"N={n}", fontsize=9)
    ax.legend()
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig5(manifest_path, manifest, out_base):
    """Boundary estimate versus training-set size."""
    apply_style()
    table = read_csv(
        artifact_path(manifest_path, _art(manifest, "boundary_vs_m")),
        _hash(manifest), ["N", "M", "estimate"])
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(table.column("M", int), table.column("estimate"), "o-")
    ax.set_xlabel("training points M")
    ax.set_ylabel("boundary estimate")
    ax.set_title(f"N={table.column('N', int)[0]}", fontsize=9)
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig6(manifest_path, manifest, out_base):
    """Shot-requirement panels: spread bounds linear, CA bounds log."""
    apply_style()
    table = read_csv(artifact_path(manifest_path, _art(manifest, "bounds")),
                     _hash(manifest),
                     ["model", "N", "s_spread", "s_ca"])
    models = table.columns["model"]
    n = table.column("N", int)
    spread = table.column("s_spread")
    ca = table.column("s_ca")
    fig, axes = plt.subplots(2, 2, figsize=(7.4, 5.6))
    free = [m for m in ("ising", "xy", "xx") if m in models]
    pair = [m for m in ("xx", "xxz") if m in models]
    panels = [(axes[0][0], free, spread, "S_spread", False),
              (axes[0][1], pair, spread, "S_spread", False),
              (axes[1][0], free, ca, "S_CA", True),
              (axes[1][1], pair, ca, "S_CA", True)]
    for ax, group, series, ylabel, log in panels:
        for name in group:
            xs = [ni for ni, mi in zip(n, models) if mi == name]
            ys = [si for si, mi in zip(series, models) if mi == name]
            if xs:
                ax.plot(xs, ys, "o-", label=name,
                        color=MODEL_COLORS.get(name))
        if log:
            ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel(ylabel)
        if group:
            ax.legend(fontsize=7)
    fig.tight_layout()
    return save_twin(fig, out_base)


def _drift_figure(manifest_path, manifest, out_base, log_x):
    table = read_csv(artifact_path(manifest_path, _art(manifest, "drift")),
                     _hash(manifest), ["N", "estimate", "source"])
    curve = read_csv(
        artifact_path(manifest_path, _art(manifest, "fit_curve")),
        _hash(manifest), ["N", "fitted"])
    fit = read_json(artifact_path(manifest_path, _art(manifest, "fit")),
                    _hash(manifest))
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(table.column("N", int), table.column("estimate"), "s",
            label=table.columns["source"][0])
    ax.plot(curve.column("N"), curve.column("fitted"), "-",
            label=f"{fit['model']} fit")
    if log_x:
        ax.set_xscale("log")
    params = ", ".join(f"{k}={v:.5f}" for k, v in fit["params"].items())
    ax.set_title(params, fontsize=7)
    ax.set_xlabel("N")
    ax.set_ylabel("pseudo-critical estimate")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig7(manifest_path, manifest, out_base):
    """Finite-size drift of pseudo-critical estimates with power fit."""
    apply_style()
    return _drift_figure(manifest_path, manifest, out_base, log_x=True)


def fig8(manifest_path, manifest, out_base):
    """Kernel-entry histograms per system size."""
    apply_style()
    table = read_csv(
        artifact_path(manifest_path, _art(manifest, "histogram")),
        _hash(manifest), ["N", "bin_lo", "bin_hi", "count"])
    n_col = table.column("N", int)
    sizes = sorted(set(n_col))
    fig, axes = plt.subplots(1, len(sizes), figsize=(3.2 * len(sizes), 2.8),
                             squeeze=False)
    for ax, n in zip(axes[0], sizes):
        lo = [v for v, ni in zip(table.column("bin_lo"), n_col) if ni == n]
        hi = [v for v, ni in zip(table.column("bin_hi"), n_col) if ni == n]
        cnt = [v for v, ni in zip(table.column("count", int), n_col) if ni == n]
        ax.bar(lo, cnt, width=np.subtract(hi, lo), align="edge",
               edgecolor="k", linewidth=0.4)
        ax.set_title(f"N={n}", fontsize=9)
        ax.set_xlabel("kernel value")
    axes[0][0].set_ylabel("count")
    fig.tight_layout()
    return save_twin(fig, out_base)


def fig9b(manifest_path, manifest, out_base):
    """Logarithmic (BKT-type) drift of pseudo-critical estimates."""
    apply_style()
    return _drift_figure(manifest_path, manifest, out_base, log_x=True)
