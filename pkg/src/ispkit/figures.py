"""Matplotlib rendering for the report path: metric histograms with their
normal fits, and raster images.  All figures are written to files (Agg)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import Histogram


def save_metric_histogram(
    hist: Histogram, mu: float, sigma: float, metric_name: str, path
) -> None:
    """Bar plot of a metric histogram overlaid with its moment-matched normal."""
    widths = hist.bin_right - hist.bin_left
    total = int(hist.count.sum())
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(
        hist.bin_left, hist.count, width=widths, align="edge",
        color="#4878cf", edgecolor="white", linewidth=0.4,
    )
    if sigma > 0 and total > 0:
        xs = np.linspace(hist.bin_left[0], hist.bin_right[-1], 400)
        pdf = np.exp(-0.5 * ((xs - mu) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
        # scale the density to count space so the curve overlays the bars
        ax.plot(xs, pdf * total * widths.mean(), color="#d1495b", linewidth=1.5)
    ax.set_xlabel(metric_name)
    ax.set_ylabel("count")
    ax.set_title(f"{metric_name}: mean={mu:.4g}, std={sigma:.4g}")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)


def save_raster_png(values: np.ndarray, path, value_range=None, title: str = "") -> None:
    """Render a raster to PNG with a colorbar."""
    arr = np.asarray(values, dtype=float)
    vmin, vmax = (value_range if value_range is not None else (None, None))
    fig, ax = plt.subplots(figsize=(4.2, 4))
    im = ax.imshow(arr, vmin=vmin, vmax=vmax, cmap="viridis", interpolation="nearest")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)
