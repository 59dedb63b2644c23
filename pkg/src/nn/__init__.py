# Neural layers, losses and optimizer
from .functional import batch_norm2d, conv2d, conv_transpose2d, l2_normalize_rows
from .layers import (
    BatchNorm2d,
    Conv2d,
    ConvTranspose2d,
    Flatten,
    Linear,
    Module,
    ReLU,
    Reshape,
    Sequential,
    Sigmoid,
    kaiming_uniform,
)
from .losses import mse_loss, triplet_loss
from .optim import Adam, AdamState, adam_step

__all__ = [
    "Adam",
    "AdamState",
    "BatchNorm2d",
    "Conv2d",
    "ConvTranspose2d",
    "Flatten",
    "Linear",
    "Module",
    "ReLU",
    "Reshape",
    "Sequential",
    "Sigmoid",
    "adam_step",
    "batch_norm2d",
    "conv2d",
    "conv_transpose2d",
    "kaiming_uniform",
    "l2_normalize_rows",
    "mse_loss",
    "triplet_loss",
]
