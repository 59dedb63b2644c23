"""
Adam optimizer
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from ..autodiff import Tensor
from ..utils.errors import ContractError


@dataclass
class AdamState:
    """Per-parameter moments plus the shared step counter and hyperparameters"""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Mapping[str, Tensor], **hyper: float) -> "AdamState":
        state = cls(**hyper)
        for name, tensor in params.items():
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        return state


def adam_step(params: Mapping[str, Tensor], state: AdamState) -> None:
    """
    One bias-corrected Adam update of every parameter from its ``grad``

    Raises:
        ContractError: a parameter has no gradient or no moment buffers
    """
    for name, tensor in params.items():
        if tensor.grad is None:
            raise ContractError(f"adam_step: parameter '{name}' has no gradient")
        if name not in state.m:
            raise ContractError(f"adam_step: no optimizer state for parameter '{name}'")

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t

    for name, tensor in params.items():
        grad = tensor.grad
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad

        m_hat = m / correction1
        v_hat = v / correction2
        tensor.data -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(tensor.dtype, copy=False)


class Adam:
    """Adam over a fixed, named parameter set; no weight decay"""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        state: AdamState = None
    ):
        self.params = dict(params)
        self.state = state or AdamState.for_params(self.params, lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.zero_grad()

    def step(self) -> None:
        adam_step(self.params, self.state)

    @property
    def steps(self) -> int:
        return self.state.t
