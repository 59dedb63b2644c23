"""
CSV emitters for embeddings and 2-D projections
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..utils.errors import DimensionError

PathLike = Union[str, Path]


def _check_lengths(n: int, **columns: Optional[np.ndarray]) -> None:
    for name, values in columns.items():
        if values is not None and len(values) != n:
            raise DimensionError(f"{name} has {len(values)} entries, expected {n}")


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
    return path


def export_embeddings_csv(
    E: np.ndarray,
    clusters: np.ndarray,
    labels: np.ndarray,
    path: PathLike
) -> Path:
    """
    Write ``id,z0,...,z{D-1},cluster,label``, one row per sample

    Args:
        E: Embedding matrix [N, D]
        clusters: Cluster index per sample
        labels: Ground-truth digit per sample
        path: Output file
    """
    E = np.asarray(E)
    if E.ndim != 2:
        raise DimensionError(f"embedding matrix must be 2-D, got shape {E.shape}")
    _check_lengths(len(E), clusters=clusters, labels=labels)

    frame = pd.DataFrame(E, columns=[f"z{i}" for i in range(E.shape[1])])
    frame.insert(0, "id", np.arange(len(E)))
    frame["cluster"] = np.asarray(clusters, dtype=np.int64)
    frame["label"] = np.asarray(labels, dtype=np.int64)
    path = _write(frame, path)
    logger.info(f"Wrote {len(E)} embeddings to {path}")
    return path


def read_embeddings_csv(path: PathLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of ``export_embeddings_csv``: (E, clusters, labels)"""
    frame = pd.read_csv(path)
    z_columns = [c for c in frame.columns if c.startswith("z")]
    E = frame[z_columns].to_numpy(dtype=np.float64)
    return E, frame["cluster"].to_numpy(dtype=np.int64), frame["label"].to_numpy(dtype=np.int64)


def export_projection_csv(
    points: np.ndarray,
    clusters: np.ndarray,
    labels: Optional[np.ndarray],
    path: PathLike
) -> Path:
    """Write a 2-D projection as ``id,x,y,cluster,label``"""
    points = np.asarray(points)
    if points.ndim != 2 or points.shape[1] != 2:
        raise DimensionError(f"projection must be [N, 2], got shape {points.shape}")
    _check_lengths(len(points), clusters=clusters, labels=labels)

    frame = pd.DataFrame({
        "id": np.arange(len(points)),
        "x": points[:, 0],
        "y": points[:, 1],
        "cluster": np.asarray(clusters, dtype=np.int64),
    })
    if labels is not None:
        frame["label"] = np.asarray(labels, dtype=np.int64)
    path = _write(frame, path)
    logger.info(f"Wrote {len(points)} projected points to {path}")
    return path
