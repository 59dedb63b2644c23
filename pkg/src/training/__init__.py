# Two-phase training: reconstruction, then triplet fine-tuning
from .base_trainer import BaseTrainer
from .coordinator import TRAIN_LOG_NAME, TrainingCoordinator, checkpoint_path
from .log import LOG_COLUMNS, EpochRecord, TrainLog
from .mining import TripletIndex, mine_from_embeddings, mine_triplets, triplet_arrays
from .reconstruction import PHASE1, ReconstructionTrainer, train_phase1
from .triplet import PHASE2, TripletTrainer, train_phase2, triplet_loss_value

__all__ = [
    "LOG_COLUMNS",
    "PHASE1",
    "PHASE2",
    "TRAIN_LOG_NAME",
    "BaseTrainer",
    "EpochRecord",
    "ReconstructionTrainer",
    "TrainLog",
    "TrainingCoordinator",
    "TripletIndex",
    "TripletTrainer",
    "checkpoint_path",
    "mine_from_embeddings",
    "mine_triplets",
    "train_phase1",
    "train_phase2",
    "triplet_arrays",
    "triplet_loss_value",
]
