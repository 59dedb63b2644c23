"""
Phase 1: reconstruction pre-training with mean squared error
"""

from typing import Optional

from ..data import Dataset, derive_seed, index_batches
from ..autodiff import Tensor
from ..models import Autoencoder
from ..nn import Adam, mse_loss
from .base_trainer import BaseTrainer
from .log import TrainLog

PHASE1 = "phase1"


class ReconstructionTrainer(BaseTrainer):
    """Minimises MSE between images and their reconstructions"""

    def __init__(
        self,
        model: Autoencoder,
        optimizer: Adam,
        train_ds: Dataset,
        val_ds: Dataset,
        batch_size: int = 128,
        seed: int = 0,
        record_wall_time: bool = True
    ):
        super().__init__(PHASE1, model, optimizer, batch_size, seed, record_wall_time)
        self.train_ds = train_ds
        self.val_ds = val_ds

    def train_epoch(self, epoch: int) -> float:
        self.model.train()
        total, count = 0.0, 0
        order_seed = derive_seed(self.seed, self.phase, epoch)
        for batch_index, indices in enumerate(
            index_batches(len(self.train_ds), self.batch_size, shuffle=True, seed=order_seed)
        ):
            images = Tensor(self.train_ds.images[indices])
            loss = mse_loss(self.model(images), images)
            total += self._step(loss, epoch, batch_index) * len(indices)
            count += len(indices)
        return total / max(count, 1)

    def validate(self, epoch: int) -> float:
        return self.model.reconstruction_error(self.val_ds.images)


def train_phase1(
    model: Autoencoder,
    train_ds: Dataset,
    val_ds: Dataset,
    epochs: int = 12,
    lr: float = 0.001,
    batch: int = 128,
    seed: int = 0,
    optimizer: Optional[Adam] = None,
    record_wall_time: bool = True
) -> TrainLog:
    """
    Reconstruction training of ``model`` in place

    Args:
        model: Fresh or loaded autoencoder
        train_ds: Training images
        val_ds: Held-out images for the validation reconstruction loss
        epochs: Number of epochs
        lr: Adam learning rate (ignored when ``optimizer`` is given)
        batch: Mini-batch size
        seed: Shuffle seed
        optimizer: Existing optimizer to continue from

    Returns:
        Per-epoch log of training and validation MSE
    """
    optimizer = optimizer or Adam(model.named_parameters(), lr=lr)
    trainer = ReconstructionTrainer(
        model, optimizer, train_ds, val_ds,
        batch_size=batch, seed=seed, record_wall_time=record_wall_time
    )
    return trainer.fit(epochs)
