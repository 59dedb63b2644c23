"""
Layer modules holding trainable tensors and running statistics
"""

from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np

from ..autodiff import Tensor, bias_add, get_default_dtype, matmul
from ..utils.errors import DimensionError
from . import functional as F


def kaiming_uniform(shape: Tuple[int, ...], fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """He-uniform initialisation with the ReLU gain: U(-sqrt(6 / fan_in), +sqrt(6 / fan_in))"""
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Module(ABC):
    """
    Abstract base class for every layer and model

    Trainable tensors and child modules assigned as attributes are registered
    automatically, in assignment order. Non-trainable state (batch-norm
    running statistics) is registered explicitly with ``register_buffer``.
    """

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_buffers", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value: Any) -> None:
        if isinstance(value, Module):
            self._modules[name] = value
        elif isinstance(value, Tensor) and value.requires_grad:
            self._parameters[name] = value
        object.__setattr__(self, name, value)

    def register_buffer(self, name: str, value: Tensor) -> None:
        self._buffers[name] = value
        object.__setattr__(self, name, value)

    @abstractmethod
    def forward(self, *args: Any) -> Tensor:
        pass

    def __call__(self, *args: Any) -> Tensor:
        return self.forward(*args)

    # Traversal

    def named_modules(self, prefix: str = "") -> Iterator[Tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self._modules.items():
            yield from child.named_modules(f"{prefix}.{name}" if prefix else name)

    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        result = OrderedDict()
        for prefix, module in self.named_modules():
            for name, tensor in module._parameters.items():
                result[f"{prefix}.{name}" if prefix else name] = tensor
        return result

    def named_buffers(self) -> "OrderedDict[str, Tensor]":
        result = OrderedDict()
        for prefix, module in self.named_modules():
            for name, tensor in module._buffers.items():
                result[f"{prefix}.{name}" if prefix else name] = tensor
        return result

    def parameters(self) -> list:
        return list(self.named_parameters().values())

    def num_parameters(self) -> int:
        return sum(tensor.size for tensor in self.parameters())

    # State

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        """Parameters followed by buffers, as arrays"""
        state = OrderedDict((name, t.data) for name, t in self.named_parameters().items())
        state.update((name, t.data) for name, t in self.named_buffers().items())
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        targets = OrderedDict(self.named_parameters())
        targets.update(self.named_buffers())

        missing = [name for name in targets if name not in state]
        unexpected = [name for name in state if name not in targets]
        if missing or unexpected:
            raise DimensionError(f"state mismatch: missing={missing} unexpected={unexpected}")

        for name, tensor in targets.items():
            value = np.asarray(state[name])
            if value.shape != tensor.shape:
                raise DimensionError(f"{name}: expected shape {tensor.shape}, got {value.shape}")
            tensor.data[...] = value

    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            object.__setattr__(module, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()

    def describe(self) -> Dict[str, Any]:
        """Summary of the module for logs and inspection"""
        return {
            "name": type(self).__name__,
            "training": self.training,
            "parameters": self.num_parameters(),
            "tensors": {name: list(t.shape) for name, t in self.named_parameters().items()},
        }


class Conv2d(Module):
    """3x3 convolution, stride 2, padding 1 unless configured otherwise"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel_size: int = 3,
        stride: int = 2,
        padding: int = 1
    ):
        super().__init__()
        self.stride, self.padding = stride, padding
        fan_in = in_channels * kernel_size * kernel_size
        dtype = get_default_dtype()
        self.weight = Tensor(
            kaiming_uniform((out_channels, in_channels, kernel_size, kernel_size), fan_in, rng),
            requires_grad=True, dtype=dtype
        )
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, self.stride, self.padding)


class ConvTranspose2d(Module):
    """Transposed 3x3 convolution that doubles the spatial size"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel_size: int = 3,
        stride: int = 2,
        padding: int = 1,
        output_padding: int = 1
    ):
        super().__init__()
        self.stride, self.padding, self.output_padding = stride, padding, output_padding
        fan_in = in_channels * kernel_size * kernel_size
        dtype = get_default_dtype()
        self.weight = Tensor(
            kaiming_uniform((in_channels, out_channels, kernel_size, kernel_size), fan_in, rng),
            requires_grad=True, dtype=dtype
        )
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv_transpose2d(x, self.weight, self.bias, self.stride, self.padding, self.output_padding)


class BatchNorm2d(Module):
    def __init__(self, channels: int, eps: float = 1e-5, momentum: float = 0.1):
        super().__init__()
        self.eps, self.momentum = eps, momentum
        dtype = get_default_dtype()
        self.gamma = Tensor(np.ones(channels), requires_grad=True, dtype=dtype)
        self.beta = Tensor(np.zeros(channels), requires_grad=True, dtype=dtype)
        self.register_buffer("running_mean", Tensor(np.zeros(channels), dtype=dtype))
        self.register_buffer("running_var", Tensor(np.ones(channels), dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        return F.batch_norm2d(
            x, self.gamma, self.beta, self.running_mean, self.running_var,
            training=self.training, momentum=self.momentum, eps=self.eps
        )


class Linear(Module):
    """y = x W + b with W stored as [in_features, out_features]"""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        dtype = get_default_dtype()
        self.weight = Tensor(
            kaiming_uniform((in_features, out_features), in_features, rng),
            requires_grad=True, dtype=dtype
        )
        self.bias = Tensor(np.zeros(out_features), requires_grad=True, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return bias_add(matmul(x, self.weight), self.bias)


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.relu()


class Sigmoid(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.sigmoid()


class Sequential(Module):
    """Chain of modules applied in registration order"""

    def __init__(self, **layers: Module):
        super().__init__()
        for name, layer in layers.items():
            setattr(self, name, layer)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self._modules.values():
            x = layer(x)
        return x


class Reshape(Module):
    def __init__(self, *shape: int):
        super().__init__()
        self.shape = shape

    def forward(self, x: Tensor) -> Tensor:
        return x.reshape((x.shape[0],) + tuple(self.shape))


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return x.reshape(x.shape[0], -1)
