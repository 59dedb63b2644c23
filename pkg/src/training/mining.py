"""
Unsupervised triplet mining in the current embedding space

Positives are nearest non-identical neighbours; negatives are drawn
uniformly among points farther than a distance threshold. Only images
are ever passed in, so ground-truth labels cannot influence mining.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.spatial.distance import cdist

from ..models import Autoencoder
from ..utils.errors import MiningError


@dataclass(frozen=True)
class TripletIndex:
    """Indices into the mining subset; ``fallback`` marks a farthest-point negative"""

    anchor: int
    positive: int
    negative: int
    fallback: bool = False


def triplet_arrays(triplets: Sequence[TripletIndex]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Anchor, positive and negative index arrays"""
    anchor = np.fromiter((t.anchor for t in triplets), dtype=np.int64, count=len(triplets))
    positive = np.fromiter((t.positive for t in triplets), dtype=np.int64, count=len(triplets))
    negative = np.fromiter((t.negative for t in triplets), dtype=np.int64, count=len(triplets))
    return anchor, positive, negative


def mine_from_embeddings(
    z: np.ndarray,
    threshold: float = 0.5,
    seed: int = 0,
    block_size: int = 1024
) -> List[TripletIndex]:
    """
    Mine one triplet per point of an embedding matrix

    Anchors are visited in a seeded random order. Distances are exact
    (squared Euclidean, float64), computed in blocks of anchors.

    Args:
        z: Embeddings [N, D]
        threshold: Minimum anchor-negative Euclidean distance
        seed: Seed of the anchor order and the negative draws
        block_size: Anchors per distance block

    Returns:
        One TripletIndex per anchor, in visiting order
    """
    n = len(z)
    if n < 3:
        raise MiningError(f"triplet mining needs at least 3 samples, got {n}")

    z = np.asarray(z, dtype=np.float64)
    rng = np.random.default_rng(seed)
    anchors = rng.permutation(n)
    limit = float(threshold) ** 2

    triplets: List[TripletIndex] = []
    fallbacks = 0
    for start in range(0, n, block_size):
        block = anchors[start:start + block_size]
        rows = np.arange(len(block))
        d2 = cdist(z[block], z, "sqeuclidean")

        excluded = d2.copy()
        excluded[rows, block] = np.inf
        positives = np.argmin(excluded, axis=1)

        eligible = d2 > limit
        eligible[rows, block] = False
        counts = eligible.sum(axis=1)
        draws = np.floor(rng.random(len(block)) * np.maximum(counts, 1)).astype(np.int64)
        ranks = np.cumsum(eligible, axis=1)
        negatives = np.argmax(ranks > draws[:, None], axis=1)

        empty = counts == 0
        if empty.any():
            excluded[rows, block] = -np.inf
            negatives[empty] = np.argmax(excluded[empty], axis=1)
            fallbacks += int(empty.sum())

        triplets.extend(
            TripletIndex(int(a), int(p), int(q), bool(f))
            for a, p, q, f in zip(block, positives, negatives, empty)
        )

    if fallbacks:
        logger.warning(
            f"{fallbacks}/{n} anchors had no neighbour beyond {threshold}; "
            f"used the farthest point as negative"
        )
    logger.debug(f"Mined {len(triplets)} triplets ({fallbacks} fallbacks)")
    return triplets


def mine_triplets(
    model: Autoencoder,
    images: np.ndarray,
    threshold: float = 0.5,
    seed: int = 0,
    block_size: int = 1024
) -> List[TripletIndex]:
    """
    Embed ``images`` once in eval mode and mine a triplet per image

    Args:
        model: Current autoencoder
        images: Mining subset [N, 1, 28, 28], N >= 3
        threshold: Minimum anchor-negative distance
        seed: Mining seed

    Returns:
        List of TripletIndex into ``images``
    """
    if len(images) < 3:
        raise MiningError(f"triplet mining needs at least 3 samples, got {len(images)}")
    return mine_from_embeddings(model.embed(images), threshold, seed, block_size)
