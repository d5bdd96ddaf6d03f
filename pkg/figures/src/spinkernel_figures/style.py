"""Shared deterministic figure style."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

#: One color per model family, stable across figures.
MODEL_COLORS = {"ising": "#1f77b4", "xy": "#2ca02c", "xx": "#d62728",
                "xxz": "#9467bd"}


def apply_style():
    plt.rcParams.update({
        "figure.dpi": 120,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.4,
        "svg.hashsalt": "spinkernel-figures",
    })


def save_twin(fig, out_base) -> list:
    """Write raster + vector twins with no embedded timestamps."""
    out_base = str(out_base)
    png = out_base + ".png"
    svg = out_base + ".svg"
    fig.savefig(png, metadata={"Software": "spinkernel-figures"})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return [png, svg]
