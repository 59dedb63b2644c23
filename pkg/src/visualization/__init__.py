# t-SNE projection and figure/CSV output
from .export import export_embeddings_csv, export_projection_csv, read_embeddings_csv
from .plots import (
    PALETTE,
    build_bar_figure,
    build_scatter_figure,
    render_bar_svg,
    render_digit_grid_svg,
    render_scatter_svg,
)
from .tsne import (
    MAX_POINTS,
    TsneConfig,
    TsneResult,
    conditional_probabilities,
    joint_probabilities,
    kl_divergence,
    run_tsne,
    tsne,
)

__all__ = [
    "MAX_POINTS",
    "PALETTE",
    "TsneConfig",
    "TsneResult",
    "build_bar_figure",
    "build_scatter_figure",
    "conditional_probabilities",
    "export_embeddings_csv",
    "export_projection_csv",
    "joint_probabilities",
    "kl_divergence",
    "read_embeddings_csv",
    "render_bar_svg",
    "render_digit_grid_svg",
    "render_scatter_svg",
    "run_tsne",
    "tsne",
]
