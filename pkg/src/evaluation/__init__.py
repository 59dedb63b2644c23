# Clustering metrics, label alignment and reports
from .alignment import cluster_class_counts, hungarian_align
from .metrics import (
    LARGE_SENTINEL,
    NMI_VARIANTS,
    ari,
    calinski_harabasz,
    contingency_matrix,
    davies_bouldin,
    nmi,
    silhouette,
)
from .report import MetricsReport, evaluate_clustering

__all__ = [
    "LARGE_SENTINEL",
    "NMI_VARIANTS",
    "MetricsReport",
    "ari",
    "calinski_harabasz",
    "cluster_class_counts",
    "contingency_matrix",
    "davies_bouldin",
    "evaluate_clustering",
    "hungarian_align",
    "nmi",
    "silhouette",
]
