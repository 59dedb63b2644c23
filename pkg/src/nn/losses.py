"""
Reconstruction and metric-learning losses
"""

from ..autodiff import Tensor
from ..utils.errors import ContractError, DimensionError, EmptyBatchError


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean over all elements of (pred - target)^2; gradient flows to ``pred`` only"""
    if pred.shape != target.shape:
        raise DimensionError(f"mse_loss: pred {pred.shape} vs target {target.shape}")
    target = Tensor(target.data, dtype=pred.dtype)
    return (pred - target).square().mean()


def triplet_loss(z_a: Tensor, z_p: Tensor, z_n: Tensor, margin: float = 1.0) -> Tensor:
    """
    Hinge triplet loss over squared Euclidean distances

    (1/N) * sum_i max(0, |a_i - p_i|^2 - |a_i - n_i|^2 + margin)

    Rows are expected to be L2-normalised already. Satisfied triplets
    contribute neither loss nor gradient.
    """
    if not z_a.shape == z_p.shape == z_n.shape or z_a.ndim != 2:
        raise DimensionError(f"triplet_loss: shapes {z_a.shape}, {z_p.shape}, {z_n.shape}")
    if z_a.shape[0] == 0:
        raise EmptyBatchError("triplet_loss on an empty batch")
    if margin <= 0:
        raise ContractError(f"triplet margin must be positive, got {margin}")

    positive_distance = (z_a - z_p).square().sum(axis=1)
    negative_distance = (z_a - z_n).square().sum(axis=1)
    return (positive_distance - negative_distance + margin).relu().mean()
