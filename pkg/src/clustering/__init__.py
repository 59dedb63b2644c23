# KMeans clustering and PCA projection
from .kmeans import KMeansResult, export_assignments_csv, kmeans_fit, kmeans_plusplus
from .pca import PcaModel, pca_fit_transform

__all__ = [
    "KMeansResult",
    "PcaModel",
    "export_assignments_csv",
    "kmeans_fit",
    "kmeans_plusplus",
    "pca_fit_transform",
]
