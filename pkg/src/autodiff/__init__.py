# Tensor core with reverse-mode automatic differentiation
from .tensor import (
    ComputationTape,
    Function,
    Tensor,
    add,
    backward,
    bias_add,
    get_default_dtype,
    is_grad_enabled,
    matmul,
    mean,
    mul,
    no_grad,
    precision,
    relu,
    scalar_mul,
    sigmoid,
    sqrt,
    square,
    sub,
    tensor_sum,
)
from .gradcheck import gradcheck, numerical_gradients, relative_error

__all__ = [
    "ComputationTape",
    "Function",
    "Tensor",
    "add",
    "backward",
    "bias_add",
    "get_default_dtype",
    "gradcheck",
    "is_grad_enabled",
    "matmul",
    "mean",
    "mul",
    "no_grad",
    "numerical_gradients",
    "precision",
    "relative_error",
    "relu",
    "scalar_mul",
    "sigmoid",
    "sqrt",
    "square",
    "sub",
    "tensor_sum",
]
