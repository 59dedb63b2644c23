"""
Phase 2: triplet fine-tuning of the encoder on mined triplets
"""

from typing import List, Optional

import numpy as np
from loguru import logger

from ..autodiff import Tensor
from ..data import derive_seed, index_batches
from ..models import Autoencoder
from ..nn import Adam, triplet_loss
from .base_trainer import BaseTrainer
from .log import TrainLog
from .mining import TripletIndex, mine_from_embeddings, triplet_arrays

PHASE2 = "phase2"


def triplet_loss_value(z: np.ndarray, triplets: List[TripletIndex], margin: float = 1.0) -> float:
    """Triplet loss of fixed embeddings, without building a graph"""
    anchor, positive, negative = triplet_arrays(triplets)
    z = np.asarray(z, dtype=np.float64)
    d_ap = np.square(z[anchor] - z[positive]).sum(axis=1)
    d_an = np.square(z[anchor] - z[negative]).sum(axis=1)
    return float(np.maximum(d_ap - d_an + margin, 0.0).mean())


class TripletTrainer(BaseTrainer):
    """
    Re-mines triplets from the current embeddings at the start of every epoch
    and minimises the hinge triplet loss only

    Each batch of triplets is encoded as one stacked forward pass
    (anchors, then positives, then negatives) so batch-norm statistics are
    shared across the three roles.
    """

    def __init__(
        self,
        model: Autoencoder,
        optimizer: Adam,
        mining_images: np.ndarray,
        val_images: np.ndarray,
        margin: float = 1.0,
        threshold: float = 0.5,
        batch_size: int = 128,
        seed: int = 0,
        record_wall_time: bool = True
    ):
        super().__init__(PHASE2, model, optimizer, batch_size, seed, record_wall_time)
        self.mining_images = mining_images
        self.val_images = val_images
        self.margin = margin
        self.threshold = threshold
        self.triplets: List[TripletIndex] = []

    def mine(self, images: np.ndarray, seed: int) -> List[TripletIndex]:
        return mine_from_embeddings(self.model.embed(images), self.threshold, seed)

    def train_epoch(self, epoch: int) -> float:
        self.triplets = self.mine(self.mining_images, derive_seed(self.seed, self.phase, epoch, "mine"))
        fallbacks = sum(t.fallback for t in self.triplets)
        logger.info(f"Epoch {epoch}: mined {len(self.triplets)} triplets, {fallbacks} fallbacks")

        anchor, positive, negative = triplet_arrays(self.triplets)
        self.model.train()
        total, count = 0.0, 0
        order_seed = derive_seed(self.seed, self.phase, epoch)
        for batch_index, indices in enumerate(
            index_batches(len(self.triplets), self.batch_size, shuffle=True, seed=order_seed)
        ):
            m = len(indices)
            stacked = np.concatenate([
                self.mining_images[anchor[indices]],
                self.mining_images[positive[indices]],
                self.mining_images[negative[indices]],
            ])
            z = self.model.encode(Tensor(stacked))
            loss = triplet_loss(
                z.slice_rows(0, m), z.slice_rows(m, 2 * m), z.slice_rows(2 * m, 3 * m), self.margin
            )
            total += self._step(loss, epoch, batch_index) * m
            count += m
        return total / max(count, 1)

    def validate(self, epoch: int) -> float:
        z = self.model.embed(self.val_images)
        triplets = mine_from_embeddings(z, self.threshold, derive_seed(self.seed, self.phase, epoch, "val"))
        return triplet_loss_value(z, triplets, self.margin)


def train_phase2(
    model: Autoencoder,
    mining_images: np.ndarray,
    val_images: np.ndarray,
    epochs: int = 5,
    margin: float = 1.0,
    lr: float = 0.001,
    batch: int = 128,
    seed: int = 0,
    optimizer: Optional[Adam] = None,
    threshold: float = 0.5,
    record_wall_time: bool = True
) -> TrainLog:
    """
    Triplet fine-tuning of ``model`` in place

    All parameters are stepped; decoder gradients are zero because the
    triplet loss never reaches the decoder.

    Args:
        model: Phase-1-trained autoencoder
        mining_images: Images triplets are mined from each epoch
        val_images: Held-out images for the validation triplet loss
        epochs: Number of epochs
        margin: Triplet margin
        lr: Adam learning rate (ignored when ``optimizer`` is given)
        batch: Triplets per mini-batch
        seed: Mining and shuffle seed
        optimizer: Phase-1 optimizer whose state carries over
        threshold: Minimum anchor-negative distance

    Returns:
        Per-epoch log of training and validation triplet loss
    """
    optimizer = optimizer or Adam(model.named_parameters(), lr=lr)
    trainer = TripletTrainer(
        model, optimizer, mining_images, val_images,
        margin=margin, threshold=threshold, batch_size=batch, seed=seed,
        record_wall_time=record_wall_time
    )
    return trainer.fit(epochs)
