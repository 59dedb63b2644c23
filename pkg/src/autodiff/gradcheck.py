"""
Finite-difference gradient checking in 64-bit mode
"""

from typing import Callable, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from ..utils.errors import ContractError
from .tensor import Tensor, backward, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> np.ndarray:
    """Elementwise |a - n| / max(|a|, |n|, floor)"""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def _central_difference(fn: Callable[[], Tensor], flat: np.ndarray, index: int, h: float) -> float:
    original = flat[index]
    flat[index] = original + h
    plus = fn().item()
    flat[index] = original - h
    minus = fn().item()
    flat[index] = original
    return (plus - minus) / (2.0 * h)


def gradcheck(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-4,
    max_checks: Optional[int] = None,
    seed: int = 0,
    floor: float = 1e-4,
    skip_kinks: bool = False,
    kink_tolerance: float = 1e-3
) -> float:
    """
    Compare analytic gradients against central finite differences

    With ``skip_kinks`` each coordinate is also differenced with step h/10.
    When the two estimates disagree by more than ``kink_tolerance`` the step
    straddles a non-differentiable point (a ReLU switching sign) and the
    coordinate is left out. A wrong analytic gradient still fails, since both
    estimates agree with each other there.

    Args:
        fn: Zero-argument closure returning a scalar loss built from ``inputs``
        inputs: float64 tensors with ``requires_grad=True``
        h: Finite-difference step
        max_checks: Check at most this many randomly chosen elements per input
        seed: Seed for element sampling
        floor: Magnitude floor of the relative error denominator
        skip_kinks: Leave out coordinates whose estimate depends on the step
        kink_tolerance: Relative disagreement between steps that marks a kink

    Returns:
        Maximum relative error over all checked elements
    """
    for tensor in inputs:
        if tensor.dtype != np.float64:
            raise ContractError("gradcheck needs float64 inputs; build them under precision(np.float64)")
        if not tensor.requires_grad:
            raise ContractError("gradcheck inputs must require grad")
        tensor.zero_grad()

    loss = fn()
    backward(loss)
    analytic = [tensor.grad.copy() for tensor in inputs]

    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = skipped = 0
    for position, tensor in enumerate(inputs):
        flat = tensor.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_checks is not None and flat.size > max_checks:
            indices = np.sort(rng.choice(flat.size, size=max_checks, replace=False))

        numeric = np.empty(indices.size)
        keep = np.ones(indices.size, dtype=bool)
        with no_grad():
            for j, index in enumerate(indices):
                numeric[j] = _central_difference(fn, flat, index, h)
                if skip_kinks:
                    fine = _central_difference(fn, flat, index, h / 10.0)
                    keep[j] = relative_error(np.array(numeric[j]), np.array(fine), floor) <= kink_tolerance

        errors = relative_error(analytic[position].reshape(-1)[indices[keep]], numeric[keep], floor)
        checked += int(keep.sum())
        skipped += int((~keep).sum())
        if errors.size:
            worst = max(worst, float(errors.max()))
        logger.debug(f"gradcheck input {position} shape {tensor.shape}: max rel err {worst:.3e}")

    if skipped:
        logger.warning(f"gradcheck skipped {skipped} coordinates at kinks, checked {checked}")
    if checked == 0:
        raise ContractError("gradcheck had no coordinate left to check")
    return worst


def numerical_gradients(fn: Callable[[], Tensor], inputs: Sequence[Tensor], h: float = 1e-4) -> Dict[int, np.ndarray]:
    """Full central-difference gradient of every input (small tensors only)"""
    result = {}
    with no_grad():
        for position, tensor in enumerate(inputs):
            flat = tensor.data.reshape(-1)
            grad = np.array([_central_difference(fn, flat, index, h) for index in range(flat.size)])
            result[position] = grad.reshape(tensor.shape)
    return result
