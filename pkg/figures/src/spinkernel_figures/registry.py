"""Figure-id registry and the single render entry point."""

from __future__ import annotations

from pathlib import Path

from . import panels
from .io import load_manifest

FIGURES = {
    "fig2": panels.fig2,
    "fig3": panels.fig3,
    "fig4": panels.fig4,
    "fig5": panels.fig5,
    "fig6": panels.fig6,
    "fig7": panels.fig7,
    "fig8": panels.fig8,
    "fig9b": panels.fig9b,
}


def render(figure_id: str, manifest_path, out_base) -> list:
    """Render one figure analogue; returns the written file paths."""
    if figure_id not in FIGURES:
        raise KeyError(
            f"unknown figure id {figure_id!r}; known: {sorted(FIGURES)}")
    manifest = load_manifest(manifest_path)
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    return FIGURES[figure_id](Path(manifest_path), manifest, out_base)
