"""
Pipeline commands behind the command-line subcommands
"""

from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..clustering import export_assignments_csv, kmeans_fit, pca_fit_transform
from ..data import Dataset, class_histogram, load_mnist
from ..evaluation import MetricsReport, evaluate_clustering, silhouette
from ..models import Autoencoder, load_checkpoint, read_checkpoint
from ..training import TrainingCoordinator
from ..utils.config import RunConfig
from ..utils.errors import ConfigError
from ..utils.manifest import MANIFEST_NAME, PipelineManifest
from ..visualization import (
    export_embeddings_csv,
    export_projection_csv,
    render_bar_svg,
    render_digit_grid_svg,
    render_scatter_svg,
    run_tsne,
)

METHODS = ("triplet_ae", "raw_pixels", "pca50")
METHOD_TITLES = {"triplet_ae": "Triplet-CNN-AE", "raw_pixels": "Raw pixels", "pca50": "PCA"}
SAMPLE_GRID_SIZE = 20


def _record(
    config: RunConfig,
    checkpoints: Iterable[Path] = (),
    reports: Iterable[Path] = (),
    artifacts: Iterable[Path] = ()
) -> Path:
    """Add produced files to the run manifest in the output directory"""
    path = Path(config.output_dir) / MANIFEST_NAME
    manifest = PipelineManifest.load(path) if path.exists() else PipelineManifest()
    manifest.config = config.snapshot()
    for item in checkpoints:
        manifest.add_checkpoint(item)
    for item in reports:
        manifest.add_report(item)
    for item in artifacts:
        manifest.add_artifact(item)
    return manifest.save(config.output_dir)


def _require_checkpoint(checkpoint: Optional[Path], method: str = "triplet_ae") -> Path:
    if checkpoint is None:
        raise ConfigError(f"method {method} needs --checkpoint")
    checkpoint = Path(checkpoint)
    if not checkpoint.exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    return checkpoint


def _load_test(config: RunConfig, count: Optional[int]) -> Dataset:
    return load_mnist(config.require_data_dir(), "test").head(count)


def method_features(
    config: RunConfig,
    method: str,
    images: np.ndarray,
    model: Optional[Autoencoder] = None
) -> np.ndarray:
    """
    Feature matrix a method clusters on

    Args:
        config: Run configuration (PCA size)
        method: ``triplet_ae``, ``raw_pixels`` or ``pca50``
        images: [N, 1, 28, 28]
        model: Trained autoencoder, required for ``triplet_ae``

    Returns:
        [N, D] features
    """
    if method == "triplet_ae":
        if model is None:
            raise ConfigError("method triplet_ae needs a checkpoint")
        return model.embed(images).astype(np.float64)
    pixels = images.reshape(len(images), -1).astype(np.float64)
    if method == "raw_pixels":
        return pixels
    if method == "pca50":
        projected, _ = pca_fit_transform(pixels, config.pca_components)
        return projected
    raise ConfigError(f"unknown method {method!r}; choose one of {METHODS}")


def _evaluate_method(
    config: RunConfig,
    method: str,
    test_ds: Dataset,
    model: Optional[Autoencoder]
) -> Tuple[MetricsReport, np.ndarray]:
    logger.info(f"Evaluating {method} on {len(test_ds)} test samples (KMeans k={config.k}, seed={config.seed})")
    features = method_features(config, method, test_ds.images, model)
    clustering = kmeans_fit(features, k=config.k, seed=config.seed)
    report = evaluate_clustering(
        features, test_ds.labels, clustering.assignments,
        k=config.k, nmi_variant=config.nmi_variant,
        silhouette_sample_size=config.silhouette_sample_size, seed=config.seed
    )
    return report, clustering.assignments


def cmd_train(config: RunConfig, phase1_only: bool = False) -> Dict[str, Any]:
    """Run the two-phase training schedule and write checkpoints and the log"""
    coordinator = TrainingCoordinator(config)
    coordinator.initialize()
    result = coordinator.run(phase1_only=phase1_only)
    _record(config, checkpoints=coordinator.checkpoints.values(), reports=[Path(result["train_log"])])
    return result


def cmd_evaluate(
    config: RunConfig,
    checkpoint: Optional[Path] = None,
    method: str = "triplet_ae"
) -> MetricsReport:
    """Cluster the test set with one method and write its metrics and assignments"""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose one of {METHODS}")
    model = load_checkpoint(_require_checkpoint(checkpoint), config.latent_dim) if method == "triplet_ae" else None

    test_ds = _load_test(config, config.eval_subset)
    report, assignments = _evaluate_method(config, method, test_ds, model)
    if model is not None:
        logger.info(f"Test reconstruction MSE: {model.reconstruction_error(test_ds.images):.6f}")

    output_dir = Path(config.output_dir)
    report_path = report.save(output_dir / f"metrics_{method}.json")
    assignments_path = export_assignments_csv(assignments, output_dir / f"assignments_{method}.csv")
    _record(config, reports=[report_path], artifacts=[assignments_path])
    return report


def _baseline_silhouettes(config: RunConfig, images: np.ndarray, embedding_score: float) -> Dict[str, float]:
    scores = {"triplet_ae": embedding_score}
    for method in ("raw_pixels", "pca50"):
        features = method_features(config, method, images)
        scores[method] = silhouette(features, kmeans_fit(features, k=config.k, seed=config.seed).assignments)
    return scores


def cmd_visualize(config: RunConfig, checkpoint: Optional[Path] = None) -> Dict[str, Path]:
    """
    Project the first test embeddings with t-SNE and render the figures

    Writes embeddings.csv, tsne.csv, tsne.svg, silhouette_bars.svg,
    class_distribution.svg and samples.svg.
    """
    model = load_checkpoint(_require_checkpoint(checkpoint), config.latent_dim)
    full_test = _load_test(config, None)
    test_ds = full_test.head(config.tsne_points)
    output_dir = Path(config.output_dir)

    embeddings = model.embed(test_ds.images)
    clustering = kmeans_fit(embeddings, k=config.k, seed=config.seed)
    result = run_tsne(embeddings, config.tsne_config())

    files = {
        "embeddings": export_embeddings_csv(
            embeddings, clustering.assignments, test_ds.labels, output_dir / "embeddings.csv"
        ),
        "tsne_csv": export_projection_csv(
            result.embedding, clustering.assignments, test_ds.labels, output_dir / "tsne.csv"
        ),
        "tsne_svg": render_scatter_svg(
            result.embedding, clustering.assignments, output_dir / "tsne.svg",
            title="t-SNE of latent embeddings"
        ),
    }

    scores = _baseline_silhouettes(
        config, test_ds.images, silhouette(embeddings, clustering.assignments)
    )
    files["silhouette_bars"] = render_bar_svg(
        [METHOD_TITLES[m] for m in METHODS], [scores[m] for m in METHODS],
        output_dir / "silhouette_bars.svg", title="Silhouette score by method", ylabel="Silhouette"
    )
    files["class_distribution"] = render_bar_svg(
        [str(d) for d in range(10)], class_histogram(full_test).tolist(),
        output_dir / "class_distribution.svg", title="Test samples per digit", ylabel="Count"
    )

    grid = test_ds.images[:SAMPLE_GRID_SIZE]
    files["samples"] = render_digit_grid_svg(
        grid, output_dir / "samples.svg", reconstructions=model.reconstructions(grid),
        title="Originals and reconstructions"
    )

    _record(config, artifacts=files.values())
    return files


def cmd_inspect_checkpoint(path: Path, latent_dim: int = 64) -> Dict[str, Any]:
    """Summarise a checkpoint: phase, epoch, tensors and trainable parameter count"""
    checkpoint = read_checkpoint(path)
    model = load_checkpoint(path, latent_dim)
    description = model.describe()
    summary = {
        "path": str(path),
        "format_version": checkpoint.version,
        "phase": checkpoint.phase,
        "epoch": checkpoint.epoch,
        "tensors": len(checkpoint.tensors),
        "trainable_parameters": description["parameters"],
        "encoder_parameters": description["encoder_parameters"],
        "decoder_parameters": description["decoder_parameters"],
        "optimizer_steps": checkpoint.optimizer.t if checkpoint.optimizer is not None else None,
        "shapes": {name: list(array.shape) for name, array in checkpoint.tensors.items()},
    }
    logger.info(f"Checkpoint {path}: phase={summary['phase']} epoch={summary['epoch']}")
    logger.info(f"Trainable parameters: {summary['trainable_parameters']}")
    for name, shape in summary["shapes"].items():
        logger.debug(f"  {name}: {shape}")
    return summary


def cmd_compare(config: RunConfig, checkpoint: Optional[Path] = None) -> pd.DataFrame:
    """Evaluate all three methods on the same test set and tabulate them"""
    model = load_checkpoint(_require_checkpoint(checkpoint), config.latent_dim)
    test_ds = _load_test(config, config.eval_subset)

    reports = {method: _evaluate_method(config, method, test_ds, model)[0] for method in METHODS}
    table = pd.DataFrame([{"method": m, **reports[m].model_dump()} for m in METHODS])

    ours = reports["triplet_ae"].silhouette
    for baseline in ("raw_pixels", "pca50"):
        base = reports[baseline].silhouette
        if base != 0:
            logger.info(f"Silhouette improvement over {baseline}: {(ours - base) / abs(base) * 100:.1f}%")

    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    table_path = output_dir / "comparison.csv"
    table.to_csv(table_path, index=False, float_format="%.6f", lineterminator="\n")
    bars_path = render_bar_svg(
        [METHOD_TITLES[m] for m in METHODS], [reports[m].silhouette for m in METHODS],
        output_dir / "silhouette_bars.svg", title="Silhouette score by method", ylabel="Silhouette"
    )
    _record(config, reports=[table_path], artifacts=[bars_path])
    return table
