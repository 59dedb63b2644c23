"""
Base trainer class shared by both training phases
"""

import math
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from loguru import logger

from ..autodiff import Tensor, backward
from ..models import Autoencoder
from ..nn import Adam
from ..utils.errors import NumericAbortError
from .log import EpochRecord, TrainLog


class BaseTrainer(ABC):
    """
    Abstract base class for an epoch-based training phase

    Subclasses implement one pass over the training data and one validation
    pass; ``fit`` runs them in order and collects the log.

    Args:
        phase: Name written into every log record
        model: Autoencoder updated in place
        optimizer: Adam instance, possibly shared with another phase
        batch_size: Mini-batch size
        seed: Root seed; per-epoch seeds are derived from it
        record_wall_time: Record epoch durations (0.0 otherwise)
    """

    def __init__(
        self,
        phase: str,
        model: Autoencoder,
        optimizer: Adam,
        batch_size: int = 128,
        seed: int = 0,
        record_wall_time: bool = True
    ):
        self.phase = phase
        self.model = model
        self.optimizer = optimizer
        self.batch_size = batch_size
        self.seed = seed
        self.record_wall_time = record_wall_time
        self.log = TrainLog()
        self.batch_losses: List[float] = []
        self.epochs_completed = 0

    @abstractmethod
    def train_epoch(self, epoch: int) -> float:
        """Run one epoch of updates and return the mean training loss"""
        pass

    @abstractmethod
    def validate(self, epoch: int) -> float:
        """Return the validation loss after ``epoch``"""
        pass

    def fit(self, epochs: int) -> TrainLog:
        """
        Train for ``epochs`` epochs

        Args:
            epochs: Number of epochs; 0 leaves the model untouched

        Returns:
            Log with one record per epoch of this call
        """
        logger.info(f"Starting {self.phase}: {epochs} epochs, batch size {self.batch_size}")
        run_log = TrainLog()

        for _ in range(epochs):
            epoch = self.epochs_completed + 1
            start_time = time.time()
            try:
                train_loss = self.train_epoch(epoch)
                val_loss = self.validate(epoch)
                if not math.isfinite(val_loss):
                    # batch index -1 marks the validation pass
                    raise NumericAbortError(self.phase, epoch, -1, val_loss)
            except NumericAbortError as e:
                logger.error(f"{self.phase} aborted: {str(e)}")
                raise

            seconds = time.time() - start_time if self.record_wall_time else 0.0
            record = EpochRecord(
                phase=self.phase,
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                seconds=seconds
            )
            self.log.append(record)
            run_log.append(record)
            self.epochs_completed = epoch
            logger.info(
                f"{self.phase} epoch {epoch}: train_loss={train_loss:.6f} "
                f"val_loss={val_loss:.6f} ({seconds:.1f}s)"
            )

        return run_log

    def _step(self, loss: Tensor, epoch: int, batch_index: int) -> float:
        """Check the loss, backpropagate and apply one optimizer update"""
        value = loss.item()
        if not loss.is_finite():
            logger.error(
                f"Non-finite {self.phase} loss at epoch {epoch}, batch {batch_index}: {value}"
            )
            raise NumericAbortError(self.phase, epoch, batch_index, value)

        self.optimizer.zero_grad()
        backward(loss)
        self.optimizer.step()

        self.batch_losses.append(value)
        logger.debug(f"{self.phase} epoch {epoch} batch {batch_index}: loss={value:.6f}")
        return value

    def get_status(self) -> Dict[str, Any]:
        """Get trainer status information"""
        last: Optional[EpochRecord] = self.log.records[-1] if self.log.records else None
        return {
            "phase": self.phase,
            "epochs_completed": self.epochs_completed,
            "optimizer_steps": self.optimizer.steps,
            "batch_size": self.batch_size,
            "last_train_loss": last.train_loss if last else None,
            "last_val_loss": last.val_loss if last else None,
        }
