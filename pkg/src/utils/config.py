"""
Run configuration: defaults, JSON config files, environment and CLI overrides
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Union

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError

DATA_DIR_ENV = "LATENT_CLUSTER_DATA_DIR"


class RunConfig(BaseModel):
    """Every tunable of the pipeline; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    data_dir: Optional[Path] = Field(
        default=None, description=f"Directory holding the four MNIST IDX files (env {DATA_DIR_ENV})"
    )
    output_dir: Path = Field(default=Path("outputs"), description="Directory for checkpoints, logs and reports")
    seed: int = Field(default=0, description="Root seed for initialisation, shuffling, mining, KMeans and t-SNE")
    lr: float = Field(default=0.001, gt=0, description="Adam learning rate")
    batch: int = Field(default=128, ge=1, description="Mini-batch size")
    latent_dim: int = Field(default=64, ge=1, description="Latent embedding size")
    margin: float = Field(default=1.0, gt=0, description="Triplet loss margin")
    phase1_epochs: int = Field(default=12, ge=0, description="Reconstruction training epochs")
    phase2_epochs: int = Field(default=5, ge=0, description="Triplet fine-tuning epochs")
    mining_subset: int = Field(default=20000, ge=3, description="Training samples used for triplet mining")
    neg_threshold: float = Field(default=0.5, ge=0, description="Minimum anchor-negative distance when mining")
    k: int = Field(default=10, ge=2, description="Number of KMeans clusters")
    pca_components: int = Field(default=50, ge=1, description="Components of the PCA baseline")
    nmi_variant: Literal["arithmetic", "geometric"] = Field(
        default="arithmetic", description="Entropy mean used to normalise NMI"
    )
    train_subset: Optional[int] = Field(
        default=None, ge=2, description="Use only the first N training images (all if unset)"
    )
    eval_subset: Optional[int] = Field(
        default=None, ge=2, description="Evaluate on the first N test images (all if unset)"
    )
    silhouette_sample_size: Optional[int] = Field(
        default=None, ge=2, description="Seeded subsample for the silhouette score (all if unset)"
    )
    record_wall_time: bool = Field(
        default=True, description="Record epoch durations in training logs (false gives byte-identical logs)"
    )
    log_level: str = Field(default="INFO", description="Log level: DEBUG, INFO, WARNING or ERROR")
    tsne_perplexity: float = Field(default=30.0, gt=0, description="t-SNE perplexity")
    tsne_iterations: int = Field(default=1000, ge=1, description="t-SNE gradient steps")
    tsne_learning_rate: float = Field(default=200.0, gt=0, description="t-SNE learning rate")
    tsne_early_exaggeration: float = Field(default=12.0, gt=0, description="t-SNE early exaggeration factor")
    tsne_exaggeration_iterations: int = Field(
        default=250, ge=0, description="Iterations with exaggeration; momentum switches at the same point"
    )
    tsne_momentum: float = Field(default=0.5, ge=0, lt=1, description="t-SNE momentum during exaggeration")
    tsne_final_momentum: float = Field(default=0.8, ge=0, lt=1, description="t-SNE momentum afterwards")
    tsne_points: int = Field(default=3000, ge=3, description="Test samples projected by t-SNE")

    def require_data_dir(self) -> Path:
        if self.data_dir is None:
            raise ConfigError(f"no data directory: pass --data-dir or set {DATA_DIR_ENV}")
        return self.data_dir

    def tsne_config(self):
        from ..visualization.tsne import TsneConfig

        return TsneConfig(
            perplexity=self.tsne_perplexity,
            iterations=self.tsne_iterations,
            learning_rate=self.tsne_learning_rate,
            early_exaggeration=self.tsne_early_exaggeration,
            exaggeration_iterations=self.tsne_exaggeration_iterations,
            momentum=self.tsne_momentum,
            final_momentum=self.tsne_final_momentum,
            seed=self.seed,
        )

    def snapshot(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Flat JSON object of RunConfig keys"""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {str(e)}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return payload


def load_run_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Resolve the run configuration

    Precedence: defaults < JSON config file < overrides. ``data_dir`` falls
    back to the environment (``.env`` is loaded first).

    Args:
        config_path: Optional flat JSON config file
        overrides: Values from the command line

    Returns:
        Validated RunConfig
    """
    load_dotenv()
    values: Dict[str, Any] = {}
    if config_path is not None:
        values.update(read_config_file(config_path))
    if overrides:
        values.update({key: value for key, value in overrides.items() if value is not None})
    if values.get("data_dir") is None and os.getenv(DATA_DIR_ENV):
        values["data_dir"] = os.getenv(DATA_DIR_ENV)

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e

    logger.debug(f"Resolved configuration: {config.snapshot()}")
    return config
