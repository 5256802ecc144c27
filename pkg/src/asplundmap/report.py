"""Matplotlib figures for distance maps and detections.

Rendering always goes through the Agg backend and straight to a file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .asplund import DistanceMap  # noqa: E402
from .lip import Image  # noqa: E402
from .morpho import StructuringFunction  # noqa: E402

__all__ = ["plot_map", "plot_pipeline"]


def _show_image(ax, f: Image, title):
    # LIP tones: 0 is white, so display with a reversed grey ramp
    ax.imshow(f.values, cmap="gray_r", vmin=0, vmax=f.M, interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()


def _show_map(ax, dmap: DistanceMap, threshold=None, title="distance map"):
    shown = np.where(dmap.valid & np.isfinite(dmap.values), dmap.values, np.nan)
    im = ax.imshow(shown, cmap="viridis", interpolation="nearest")
    if threshold is not None:
        below = dmap.valid & (dmap.values < threshold)
        overlay = np.ma.masked_where(~below, np.ones_like(shown))
        ax.imshow(overlay, cmap="winter", alpha=0.8, interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()
    return im


def plot_map(dmap: DistanceMap, path, threshold=None, dpi=120):
    """Single-panel map rendering with a colorbar."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = _show_map(ax, dmap, threshold)
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)


def plot_pipeline(
    f: Image,
    darkened: Image,
    probe: StructuringFunction,
    anchor,
    dmap: DistanceMap,
    detections,
    threshold: float,
    path,
    dpi=120,
):
    """Three panels: reference with probe outline, thresholded map, detections."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 4.2))
    _show_image(axes[0], f, "image and probe")
    if anchor is not None:
        offs = probe.domain.as_array()
        axes[0].scatter(
            anchor[0] + offs[:, 0], anchor[1] + offs[:, 1], s=4, c="lime", marker="s", linewidths=0
        )
    im = _show_map(axes[1], dmap, threshold, f"distance map (p = {dmap.tolerance:g})")
    fig.colorbar(im, ax=axes[1], fraction=0.046, pad=0.04)
    _show_image(axes[2], darkened, f"{len(detections)} detection(s)")
    if detections:
        xs = [d.position[0] for d in detections]
        ys = [d.position[1] for d in detections]
        axes[2].scatter(xs, ys, s=30, c="red")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
