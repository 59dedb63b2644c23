"""
Static SVG figures: cluster scatter, metric bars and digit grids
"""

from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from loguru import logger  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from ..utils.errors import ContractError, DimensionError  # noqa: E402

PathLike = Union[str, Path]

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

# fixed salt and no date keep repeated renders byte-identical
_SVG_RC = {"svg.hashsalt": "latent-cluster", "svg.fonttype": "path"}


def save_svg(fig: Figure, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Figure saved to {path}")
    return path


def build_scatter_figure(
    points: np.ndarray,
    colors: np.ndarray,
    title: Optional[str] = None,
    legend_labels: Optional[Sequence[str]] = None
) -> Figure:
    """Scatter of 2-D points coloured by cluster index, without axes"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    colors = np.asarray(colors, dtype=np.int64).reshape(-1)
    if len(points) != len(colors):
        raise DimensionError(f"{len(points)} points but {len(colors)} colour indices")
    if colors.size and (colors.min() < 0 or colors.max() >= len(PALETTE)):
        raise ContractError(f"colour indices must lie in 0..{len(PALETTE) - 1}")

    fig, ax = plt.subplots(figsize=(8, 8))
    for index in np.unique(colors):
        members = colors == index
        label = legend_labels[index] if legend_labels is not None else f"Cluster {index}"
        ax.scatter(
            points[members, 0], points[members, 1],
            s=6, color=PALETTE[index], label=label, linewidths=0
        )
    if colors.size:
        ax.legend(loc="upper right", markerscale=3, fontsize=8, frameon=False)
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    return fig


def render_scatter_svg(
    points: np.ndarray,
    colors: np.ndarray,
    path: PathLike,
    title: Optional[str] = None,
    legend_labels: Optional[Sequence[str]] = None
) -> Path:
    return save_svg(build_scatter_figure(points, colors, title, legend_labels), path)


def build_bar_figure(
    labels: Sequence[str],
    values: Sequence[float],
    title: Optional[str] = None,
    ylabel: Optional[str] = None
) -> Figure:
    """Bar chart with the value printed above each bar"""
    if len(labels) != len(values):
        raise DimensionError(f"{len(labels)} labels but {len(values)} values")

    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(
        list(labels), list(values),
        color=[PALETTE[i % len(PALETTE)] for i in range(len(values))]
    )
    for i, bar in enumerate(bars):
        bar.set_gid(f"bar-{i}")
    ax.bar_label(bars, fmt="%.4f", padding=2)
    if title:
        ax.set_title(title)
    if ylabel:
        ax.set_ylabel(ylabel)
    ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    return fig


def render_bar_svg(
    labels: Sequence[str],
    values: Sequence[float],
    path: PathLike,
    title: Optional[str] = None,
    ylabel: Optional[str] = None
) -> Path:
    return save_svg(build_bar_figure(labels, values, title, ylabel), path)


def render_digit_grid_svg(
    images: np.ndarray,
    path: PathLike,
    reconstructions: Optional[np.ndarray] = None,
    columns: int = 10,
    title: Optional[str] = None
) -> Path:
    """
    Grid of digit images; with ``reconstructions`` each original is shown
    above its reconstruction

    Args:
        images: [N, 1, 28, 28] or [N, 28, 28] in [0, 1]
        path: Output SVG
        reconstructions: Optional array shaped like ``images``
        columns: Images per row
    """
    images = np.asarray(images).reshape(len(images), 28, 28)
    if reconstructions is not None:
        reconstructions = np.asarray(reconstructions).reshape(len(reconstructions), 28, 28)
        if len(reconstructions) != len(images):
            raise DimensionError(f"{len(images)} images but {len(reconstructions)} reconstructions")

    columns = max(1, min(columns, len(images) or 1))
    image_rows = -(-len(images) // columns) or 1
    rows_per_image = 1 if reconstructions is None else 2
    fig, axes = plt.subplots(
        image_rows * rows_per_image, columns,
        figsize=(columns * 0.9, image_rows * rows_per_image * 0.9),
        squeeze=False
    )
    for ax in axes.ravel():
        ax.set_axis_off()
    for i, image in enumerate(images):
        row, col = divmod(i, columns)
        axes[row * rows_per_image, col].imshow(image, cmap="gray", vmin=0.0, vmax=1.0)
        if reconstructions is not None:
            axes[row * rows_per_image + 1, col].imshow(reconstructions[i], cmap="gray", vmin=0.0, vmax=1.0)
    if title:
        fig.suptitle(title)
    return save_svg(fig, path)
