"""
Training Coordinator - Runs the two-phase schedule end to end
"""

import time
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger

from ..data import Dataset, SplitSpec, derive_seed, load_mnist, split
from ..models import Autoencoder, save_checkpoint
from ..nn import Adam
from ..utils.config import RunConfig
from .log import TrainLog
from .reconstruction import PHASE1, train_phase1
from .triplet import PHASE2, train_phase2

TRAIN_LOG_NAME = "train_log.csv"


def checkpoint_path(output_dir: Path, phase: str) -> Path:
    return Path(output_dir) / f"{phase}.ckpt"


class TrainingCoordinator:
    """
    Owns the model, the shared optimizer and the data splits of one run

    Phase 1 and Phase 2 share a single Adam instance so the optimizer state
    carries over between them.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.model: Optional[Autoencoder] = None
        self.optimizer: Optional[Adam] = None
        self.train_ds: Optional[Dataset] = None
        self.val_ds: Optional[Dataset] = None
        self.mining_images: Optional[np.ndarray] = None
        self.log = TrainLog()
        self.checkpoints: Dict[str, Path] = {}
        self.initialized = False

    def initialize(self, dataset: Optional[Dataset] = None) -> None:
        """
        Load and split the training data, build the model and optimizer

        Args:
            dataset: Training data to use instead of the MNIST files
        """
        try:
            logger.info("Initializing Training Coordinator...")
            config = self.config
            if dataset is None:
                dataset = load_mnist(config.require_data_dir(), "train")
            dataset = dataset.head(config.train_subset)

            self.train_ds, self.val_ds = split(dataset, SplitSpec(train_fraction=0.8, seed=config.seed))
            rng = np.random.default_rng(derive_seed(config.seed, "mining-subset"))
            size = min(config.mining_subset, len(self.train_ds))
            indices = np.sort(rng.choice(len(self.train_ds), size=size, replace=False))
            self.mining_images = self.train_ds.images[indices]

            self.model = Autoencoder(latent_dim=config.latent_dim, seed=config.seed)
            self.optimizer = Adam(self.model.named_parameters(), lr=config.lr)
            self.initialized = True
            logger.info(
                f"Training Coordinator ready: {len(self.train_ds)} train, {len(self.val_ds)} validation, "
                f"{size} mining samples, {self.model.num_parameters()} parameters"
            )
        except Exception as e:
            logger.error(f"Failed to initialize Training Coordinator: {str(e)}")
            raise

    def _save(self, phase: str, epoch: int) -> Path:
        path = checkpoint_path(self.config.output_dir, phase)
        save_checkpoint(self.model, path, phase=phase, epoch=epoch, optimizer_state=self.optimizer.state)
        self.checkpoints[phase] = path
        return path

    def run_phase1(self) -> TrainLog:
        config = self.config
        phase_log = train_phase1(
            self.model, self.train_ds, self.val_ds,
            epochs=config.phase1_epochs, lr=config.lr, batch=config.batch, seed=config.seed,
            optimizer=self.optimizer, record_wall_time=config.record_wall_time
        )
        self.log.extend(phase_log.records)
        self._save(PHASE1, config.phase1_epochs)
        return phase_log

    def run_phase2(self) -> TrainLog:
        config = self.config
        phase_log = train_phase2(
            self.model, self.mining_images, self.val_ds.images,
            epochs=config.phase2_epochs, margin=config.margin, lr=config.lr, batch=config.batch,
            seed=config.seed, optimizer=self.optimizer, threshold=config.neg_threshold,
            record_wall_time=config.record_wall_time
        )
        self.log.extend(phase_log.records)
        self._save(PHASE2, config.phase2_epochs)
        return phase_log

    def run(self, phase1_only: bool = False) -> Dict[str, Any]:
        """
        Run Phase 1 and, unless ``phase1_only``, Phase 2

        Returns:
            Dictionary with checkpoint paths, log path and log fingerprint
        """
        start_time = time.time()
        if not self.initialized:
            raise RuntimeError("Training Coordinator not initialized")

        try:
            self.run_phase1()
            if not phase1_only:
                self.run_phase2()
        finally:
            log_path = self.log.to_csv(Path(self.config.output_dir) / TRAIN_LOG_NAME)

        result = {
            "checkpoints": {phase: str(path) for phase, path in self.checkpoints.items()},
            "train_log": str(log_path),
            "log_fingerprint": self.log.fingerprint(),
            "epochs": len(self.log),
            "processing_time": time.time() - start_time,
        }
        logger.info(f"Training finished in {result['processing_time']:.1f}s ({result['epochs']} epochs)")
        return result

    def get_status(self) -> Dict[str, Any]:
        return {
            "initialized": self.initialized,
            "train_samples": len(self.train_ds) if self.train_ds is not None else 0,
            "validation_samples": len(self.val_ds) if self.val_ds is not None else 0,
            "optimizer_steps": self.optimizer.steps if self.optimizer is not None else 0,
            "checkpoints": {phase: str(path) for phase, path in self.checkpoints.items()},
            "logged_epochs": len(self.log),
        }
