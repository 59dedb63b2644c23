"""
Cluster-to-class alignment by maximum-weight matching
"""

from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..utils.errors import ContractError


def cluster_class_counts(true_labels: np.ndarray, pred_clusters: np.ndarray, k: int = 10) -> np.ndarray:
    """Counts [cluster, class] over labels in 0..k-1"""
    true_labels = np.asarray(true_labels, dtype=np.int64)
    pred_clusters = np.asarray(pred_clusters, dtype=np.int64)
    if len(true_labels) != len(pred_clusters):
        raise ContractError(f"{len(true_labels)} labels but {len(pred_clusters)} cluster assignments")
    for name, values in (("labels", true_labels), ("clusters", pred_clusters)):
        if values.size and (values.min() < 0 or values.max() >= k):
            raise ContractError(f"{name} must lie in 0..{k - 1}")
    return np.bincount(pred_clusters * k + true_labels, minlength=k * k).reshape(k, k)


def hungarian_align(true_labels: np.ndarray, pred_clusters: np.ndarray, k: int = 10) -> Tuple[np.ndarray, float]:
    """
    Best one-to-one mapping of cluster indices to classes

    Args:
        true_labels: Ground-truth classes in 0..k-1
        pred_clusters: Cluster indices in 0..k-1
        k: Number of clusters and classes

    Returns:
        (mapping with mapping[cluster] = class, accuracy under that mapping)
    """
    counts = cluster_class_counts(true_labels, pred_clusters, k)
    clusters, classes = linear_sum_assignment(counts, maximize=True)
    mapping = np.empty(k, dtype=np.int64)
    mapping[clusters] = classes
    total = len(true_labels)
    accuracy = float(counts[clusters, classes].sum() / total) if total else 0.0
    return mapping, accuracy
