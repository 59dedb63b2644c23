"""
Metrics report schema and the full evaluation of one clustering
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from .alignment import hungarian_align
from .metrics import ari, calinski_harabasz, davies_bouldin, nmi, silhouette


class MetricsReport(BaseModel):
    """Serialised as JSON with exactly these field names"""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    silhouette: float = Field(ge=-1.0, le=1.0)
    davies_bouldin: float = Field(ge=0.0)
    calinski_harabasz: float = Field(ge=0.0)
    nmi: float = Field(ge=0.0, le=1.0)
    ari: float = Field(ge=-1.0, le=1.0)
    aligned_accuracy: float = Field(ge=0.0, le=1.0)
    n_samples: int = Field(ge=0)
    k: int = Field(ge=1)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        logger.info(f"Metrics report written to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MetricsReport":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def evaluate_clustering(
    X: np.ndarray,
    true_labels: np.ndarray,
    assignments: np.ndarray,
    k: int = 10,
    nmi_variant: str = "arithmetic",
    silhouette_sample_size: Optional[int] = None,
    seed: int = 0
) -> MetricsReport:
    """
    Compute every metric for one clustering of ``X``

    Args:
        X: Features the clustering was computed on [N, D]
        true_labels: Ground-truth classes, used only here
        assignments: Cluster index per sample
        k: Number of clusters
        nmi_variant: ``arithmetic`` or ``geometric`` normalisation
        silhouette_sample_size: Seeded subsample for the silhouette (all samples if None)
        seed: Seed of the silhouette subsample

    Returns:
        MetricsReport
    """
    n = len(X)
    if silhouette_sample_size is not None and silhouette_sample_size < n:
        rng = np.random.default_rng(seed)
        sample = np.sort(rng.choice(n, size=silhouette_sample_size, replace=False))
        sil = silhouette(X[sample], assignments[sample])
    else:
        sil = silhouette(X, assignments)

    # alignment needs a square table covering both clusters and classes
    size = max(k, int(np.max(true_labels)) + 1) if n else k
    _, accuracy = hungarian_align(true_labels, assignments, size)
    report = MetricsReport(
        silhouette=sil,
        davies_bouldin=davies_bouldin(X, assignments),
        calinski_harabasz=calinski_harabasz(X, assignments),
        nmi=nmi(true_labels, assignments, nmi_variant),
        ari=ari(true_labels, assignments),
        aligned_accuracy=accuracy,
        n_samples=n,
        k=k,
    )
    logger.info(
        f"Silhouette={report.silhouette:.4f} DB={report.davies_bouldin:.4f} "
        f"CH={report.calinski_harabasz:.2f} NMI={report.nmi:.4f} ARI={report.ari:.4f} "
        f"ACC={report.aligned_accuracy:.4f}"
    )
    return report
