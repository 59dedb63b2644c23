"""
KMeans with k-means++ seeding and empty-cluster repair
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.spatial.distance import cdist

from ..utils.errors import ContractError, DimensionError, InsufficientDataError


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int
    inertia_history: List[float] = field(default_factory=list)
    seed: int = 0

    @property
    def k(self) -> int:
        return len(self.centroids)

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Spread-out seeding: each next centre drawn with probability proportional to D(x)^2"""
    n = len(X)
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    centers[0] = X[rng.integers(n)]
    closest = cdist(X, centers[:1], "sqeuclidean")[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            choice = rng.choice(n, p=closest / total)
        else:
            choice = rng.integers(n)
        centers[c] = X[choice]
        np.minimum(closest, cdist(X, centers[c:c + 1], "sqeuclidean")[:, 0], out=closest)
    return centers


def _assign(X: np.ndarray, centroids: np.ndarray):
    d2 = cdist(X, centroids, "sqeuclidean")
    assignments = np.argmin(d2, axis=1)
    return assignments, d2[np.arange(len(X)), assignments]


def _repair_empty(X: np.ndarray, centroids: np.ndarray, assignments: np.ndarray, costs: np.ndarray) -> int:
    """Move the point farthest from its centroid into each empty cluster; returns repairs made"""
    k = len(centroids)
    repaired = 0
    for c in range(k):
        sizes = np.bincount(assignments, minlength=k)
        if sizes[c] > 0:
            continue
        donors = sizes[assignments] > 1
        candidate_costs = np.where(donors, costs, -np.inf)
        point = int(np.argmax(candidate_costs))
        assignments[point] = c
        costs[point] = 0.0
        centroids[c] = X[point]
        repaired += 1
    if repaired:
        logger.warning(f"Repaired {repaired} empty cluster(s) by seizing the farthest points")
    return repaired


def _update_centroids(X: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    # sorting by cluster gives a fixed summation order
    order = np.argsort(assignments, kind="stable")
    sizes = np.bincount(assignments, minlength=k)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    sums = np.add.reduceat(X[order], starts, axis=0)
    return sums / sizes[:, None]


def kmeans_fit(
    X: np.ndarray,
    k: int = 10,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-4,
    init: Optional[np.ndarray] = None
) -> KMeansResult:
    """
    Lloyd's algorithm from a single k-means++ initialisation

    Iterates until the largest centroid shift drops below ``tol`` or
    ``max_iter`` is reached. Squared Euclidean distances throughout.

    Args:
        X: Data [N, D]
        k: Number of clusters
        seed: Seed of the k-means++ draw
        max_iter: Iteration cap
        tol: Centroid-shift tolerance
        init: Explicit initial centroids [k, D] instead of k-means++

    Returns:
        KMeansResult with no empty clusters
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"kmeans expects [N, D], got shape {X.shape}")
    if k < 1:
        raise ContractError(f"k must be positive, got {k}")
    n = len(X)
    if n < k:
        raise InsufficientDataError(f"kmeans with k={k} needs at least {k} samples, got {n}")

    if init is not None:
        centroids = np.array(init, dtype=np.float64)
        if centroids.shape != (k, X.shape[1]):
            raise DimensionError(f"init must have shape {(k, X.shape[1])}, got {centroids.shape}")
    else:
        centroids = kmeans_plusplus(X, k, np.random.default_rng(seed))

    history: List[float] = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        assignments, costs = _assign(X, centroids)
        _repair_empty(X, centroids, assignments, costs)
        history.append(float(costs.sum()))

        updated = _update_centroids(X, assignments, k)
        shift = float(np.sqrt(np.square(updated - centroids).sum(axis=1)).max())
        centroids = updated
        if shift < tol:
            break

    assignments, costs = _assign(X, centroids)
    _repair_empty(X, centroids, assignments, costs)
    inertia = float(costs.sum())
    logger.info(f"KMeans k={k} converged after {iterations} iterations, inertia={inertia:.4f}")
    return KMeansResult(
        centroids=centroids,
        assignments=assignments.astype(np.int64),
        inertia=inertia,
        iterations=iterations,
        inertia_history=history,
        seed=seed,
    )


def export_assignments_csv(assignments: np.ndarray, path: Union[str, Path]) -> Path:
    """Write ``index,cluster``, one row per sample"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({
        "index": np.arange(len(assignments)),
        "cluster": np.asarray(assignments, dtype=np.int64),
    })
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
