"""
PCA projection used by the pixel baseline
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from loguru import logger

from ..utils.errors import DimensionError, InsufficientDataError


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return len(self.components)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components.T

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) @ self.components + self.mean


def _fix_signs(components: np.ndarray) -> np.ndarray:
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit_transform(X: np.ndarray, n_components: int = 50) -> Tuple[np.ndarray, PcaModel]:
    """
    Project centred data onto its top right singular vectors

    Each direction is signed so its largest-magnitude entry is positive.
    If the data has fewer than ``n_components`` non-zero directions only
    those are kept.

    Args:
        X: Data [N, D], N > n_components
        n_components: Requested output dimensionality

    Returns:
        (projected data [N, r], fitted PcaModel) with r <= n_components
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"pca expects [N, D], got shape {X.shape}")
    n, d = X.shape
    if n <= n_components:
        raise InsufficientDataError(f"pca with {n_components} components needs more than {n_components} samples, got {n}")

    mean = X.mean(axis=0)
    centred = X - mean
    _, singular, vt = np.linalg.svd(centred, full_matrices=False)

    tolerance = singular.max(initial=0.0) * max(n, d) * np.finfo(np.float64).eps
    rank = int((singular > tolerance).sum())
    keep = min(n_components, rank, d)
    if keep < n_components:
        logger.warning(f"Data has rank {rank}; keeping {keep} of {n_components} requested components")

    components = _fix_signs(vt[:keep])
    variance = singular ** 2 / (n - 1)
    total = variance.sum()
    model = PcaModel(
        mean=mean,
        components=components,
        explained_variance=variance[:keep],
        explained_variance_ratio=variance[:keep] / total if total > 0 else np.zeros(keep),
    )
    logger.info(f"PCA kept {keep} components explaining {model.explained_variance_ratio.sum():.2%} of variance")
    return model.transform(X), model
