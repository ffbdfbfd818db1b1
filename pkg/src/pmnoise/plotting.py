"""Rendering of figure scans to image files next to the delimited output."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_figure_png(curves, png_path, title: str) -> None:
    """One panel of shot-normalized noise vs q_x for all curves of a figure."""
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for curve in curves:
        ax.plot(
            curve.result.q_grid[:, 0],
            curve.result.shot_normalized[:, 0],
            linewidth=0.8,
            label=curve.label.replace("_", " "),
        )
    ax.axhline(1.0, color="0.6", linewidth=0.6, linestyle="--")
    ax.set_xlabel(r"$q_x$ (units of $1/\tilde{w}_0$)")
    ax.set_ylabel("noise / shot level")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
