"""
Internal and external clustering quality metrics
"""

from fractions import Fraction
from typing import Tuple

import numpy as np
from loguru import logger
from scipy.spatial.distance import cdist

from ..utils.errors import ContractError, DimensionError, UndefinedMetricError

LARGE_SENTINEL = 1e12
NMI_VARIANTS = ("arithmetic", "geometric")


def _encode(labels: np.ndarray) -> Tuple[np.ndarray, int]:
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes.reshape(-1), int(codes.max()) + 1 if codes.size else 0


def _prepare(X: np.ndarray, labels: np.ndarray, metric: str) -> Tuple[np.ndarray, np.ndarray, int]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"{metric}: expected [N, D] data, got shape {X.shape}")
    if len(labels) != len(X):
        raise DimensionError(f"{metric}: {len(X)} samples but {len(labels)} labels")
    codes, k = _encode(labels)
    if k < 2:
        raise UndefinedMetricError(f"{metric} needs at least 2 clusters, got {k}")
    return X, codes, k


def silhouette(X: np.ndarray, labels: np.ndarray, block_size: int = 1024) -> float:
    """
    Mean silhouette coefficient with Euclidean distances

    Samples in singleton clusters score 0. Distances are computed in row
    blocks so memory stays O(block_size * N).
    """
    X, codes, k = _prepare(X, labels, "silhouette")
    n = len(X)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), codes] = 1.0
    sizes = onehot.sum(axis=0)

    scores = np.zeros(n)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        own = codes[start:stop]
        rows = np.arange(stop - start)
        sums = cdist(X[start:stop], X) @ onehot

        own_size = sizes[own]
        a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
        means = sums / sizes
        means[rows, own] = np.inf
        b = means.min(axis=1)

        denom = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(denom > 0, (b - a) / denom, 0.0)
        scores[start:stop] = np.where(own_size > 1, s, 0.0)

    return float(scores.mean())


def _centroids(X: np.ndarray, codes: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    sizes = np.bincount(codes, minlength=k)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, codes, X)
    return sums / sizes[:, None], sizes


def davies_bouldin(X: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean over clusters of the worst (s_i + s_j) / d(c_i, c_j) ratio

    Coincident centroids make the index unbounded; the large sentinel is
    returned for such pairs with a warning.
    """
    X, codes, k = _prepare(X, labels, "davies_bouldin")
    centroids, sizes = _centroids(X, codes, k)
    scatter = np.zeros(k)
    np.add.at(scatter, codes, np.sqrt(np.square(X - centroids[codes]).sum(axis=1)))
    scatter /= sizes

    separation = cdist(centroids, centroids)
    np.fill_diagonal(separation, np.inf)
    coincident = separation == 0
    if coincident.any():
        logger.warning("davies_bouldin: coincident centroids, using the large sentinel for those pairs")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (scatter[:, None] + scatter[None, :]) / separation
    ratios[coincident] = LARGE_SENTINEL
    return float(np.minimum(ratios.max(axis=1), LARGE_SENTINEL).mean())


def calinski_harabasz(X: np.ndarray, labels: np.ndarray) -> float:
    """Between- over within-cluster dispersion, each divided by its degrees of freedom"""
    X, codes, k = _prepare(X, labels, "calinski_harabasz")
    n = len(X)
    if k >= n:
        raise UndefinedMetricError(f"calinski_harabasz needs fewer clusters than samples (k={k}, N={n})")

    centroids, sizes = _centroids(X, codes, k)
    between = float((sizes * np.square(centroids - X.mean(axis=0)).sum(axis=1)).sum())
    within = float(np.square(X - centroids[codes]).sum())
    if within == 0.0:
        logger.warning("calinski_harabasz: zero within-cluster dispersion, returning the large sentinel")
        return LARGE_SENTINEL
    return (between / (k - 1)) / (within / (n - k))


def _check_labelings(true_labels: np.ndarray, pred_labels: np.ndarray, minimum: int, metric: str) -> None:
    if len(true_labels) != len(pred_labels):
        raise ContractError(f"{metric}: labelings have lengths {len(true_labels)} and {len(pred_labels)}")
    if len(true_labels) < minimum:
        raise ContractError(f"{metric} needs at least {minimum} samples, got {len(true_labels)}")


def contingency_matrix(true_labels: np.ndarray, pred_labels: np.ndarray) -> np.ndarray:
    """Exact co-occurrence counts [classes, clusters]"""
    rows, r = _encode(true_labels)
    cols, c = _encode(pred_labels)
    return np.bincount(rows * c + cols, minlength=r * c).reshape(r, c).astype(np.int64)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(true_labels: np.ndarray, pred_labels: np.ndarray, variant: str = "arithmetic") -> float:
    """
    Mutual information normalised by the arithmetic (default) or geometric
    mean of the two entropies, natural log; 0 when the normaliser is 0
    """
    if variant not in NMI_VARIANTS:
        raise ContractError(f"nmi variant must be one of {NMI_VARIANTS}, got {variant!r}")
    _check_labelings(true_labels, pred_labels, 1, "nmi")

    table = contingency_matrix(true_labels, pred_labels)
    n = int(table.sum())
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    nz_r, nz_c = np.nonzero(table)
    joint = table[nz_r, nz_c].astype(np.float64)
    mutual = float((joint / n * np.log(n * joint / (rows[nz_r] * cols[nz_c]))).sum())

    h_true, h_pred = _entropy(rows, n), _entropy(cols, n)
    if variant == "arithmetic":
        denom = (h_true + h_pred) / 2.0
    else:
        denom = float(np.sqrt(h_true * h_pred))
    if denom == 0.0:
        return 0.0
    return float(np.clip(mutual / denom, 0.0, 1.0))


def _pairs(counts: np.ndarray) -> int:
    counts = counts.astype(np.int64)
    return int((counts * (counts - 1) // 2).sum())


def ari(true_labels: np.ndarray, pred_labels: np.ndarray) -> float:
    """Adjusted Rand index from exact pair counts; 1.0 when the index is degenerate"""
    _check_labelings(true_labels, pred_labels, 2, "ari")
    table = contingency_matrix(true_labels, pred_labels)
    n = int(table.sum())

    index = _pairs(table)
    sum_rows = _pairs(table.sum(axis=1))
    sum_cols = _pairs(table.sum(axis=0))
    expected = Fraction(sum_rows * sum_cols, n * (n - 1) // 2)
    maximum = Fraction(sum_rows + sum_cols, 2)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))
