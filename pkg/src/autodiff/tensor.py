"""
Dense tensor with reverse-mode automatic differentiation

Every differentiable operation is a ``Function`` subclass. Applying one records
the function instance on the output tensor; ``backward`` walks the recorded
graph in reverse topological order and accumulates gradients.
"""

from contextlib import contextmanager
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import ContractError, DimensionError

ArrayLike = Union[np.ndarray, Sequence, float, int]

_default_dtype = np.dtype(np.float32)
_grad_enabled = True


def get_default_dtype() -> np.dtype:
    return _default_dtype


@contextmanager
def precision(dtype: Any) -> Iterator[None]:
    """
    Temporarily change the dtype new tensors are created with

    float32 is used for training; float64 exists for gradient checking.
    """
    global _default_dtype
    previous = _default_dtype
    _default_dtype = np.dtype(dtype)
    try:
        yield
    finally:
        _default_dtype = previous


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording (inference, embedding extraction, mining)"""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """
    n-dimensional float array with optional gradient tracking

    Leaf tensors created with ``requires_grad=True`` own a zero-initialised
    ``grad`` buffer of the same shape. Tensors produced by recorded operations
    receive their ``grad`` during ``backward``.
    """

    def __init__(self, data: ArrayLike, requires_grad: bool = False, dtype: Any = None):
        if isinstance(data, Tensor):
            data = data.data
        self.data: np.ndarray = np.array(data, dtype=_default_dtype if dtype is None else dtype)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = np.zeros_like(self.data) if requires_grad else None
        self._node: Optional["Function"] = None

    @classmethod
    def _from_op(cls, data: np.ndarray, node: Optional["Function"]) -> "Tensor":
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = node is not None
        out.grad = None
        out._node = node
        return out

    # Introspection

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    # Operators

    def _coerce(self, other: Any) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.dtype), dtype=self.dtype)

    def __add__(self, other: Any) -> "Tensor":
        return Add.apply(self, self._coerce(other))

    def __radd__(self, other: Any) -> "Tensor":
        return Add.apply(self._coerce(other), self)

    def __sub__(self, other: Any) -> "Tensor":
        return Sub.apply(self, self._coerce(other))

    def __rsub__(self, other: Any) -> "Tensor":
        return Sub.apply(self._coerce(other), self)

    def __mul__(self, other: Any) -> "Tensor":
        if isinstance(other, (int, float)):
            return ScalarMul.apply(self, factor=float(other))
        return Mul.apply(self, self._coerce(other))

    def __rmul__(self, other: Any) -> "Tensor":
        return self.__mul__(other)

    def __neg__(self) -> "Tensor":
        return ScalarMul.apply(self, factor=-1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return MatMul.apply(self, other)

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def sigmoid(self) -> "Tensor":
        return Sigmoid.apply(self)

    def square(self) -> "Tensor":
        return Square.apply(self)

    def sqrt(self) -> "Tensor":
        return Sqrt.apply(self)

    def sum(self, axis: Optional[int] = None) -> "Tensor":
        return Sum.apply(self, axis=axis)

    def mean(self) -> "Tensor":
        return Mean.apply(self)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)

    def slice_rows(self, start: int, stop: int) -> "Tensor":
        return SliceRows.apply(self, start=start, stop=stop)

    def backward(self) -> None:
        backward(self)


class Function:
    """
    A recorded operation: holds its input tensors and the state its
    backward rule needs
    """

    def __init__(self, *parents: Tensor):
        self.parents = parents

    @classmethod
    def apply(cls, *inputs: Tensor, **params: Any) -> Tensor:
        fn = cls(*inputs)
        data = fn.forward(*[t.data for t in inputs], **params)
        tracked = _grad_enabled and any(t.requires_grad for t in inputs)
        return Tensor._from_op(data, fn if tracked else None)

    def forward(self, *args: np.ndarray, **params: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @property
    def name(self) -> str:
        return type(self).__name__


class ComputationTape:
    """
    Operations reachable from a root tensor, in topological order

    Each entry is the output tensor of one recorded operation; an entry's
    inputs always appear before it.
    """

    def __init__(self, entries: List[Tensor]):
        self.entries = entries

    @classmethod
    def record(cls, root: Tensor) -> "ComputationTape":
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited or tensor._node is None:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            for parent in tensor._node.parents:
                if parent._node is not None and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.entries)

    def operations(self) -> List[str]:
        return [entry._node.name for entry in self.entries]


def backward(loss: Tensor) -> None:
    """
    Populate ``grad`` of every tracked tensor reachable from ``loss``

    Gradients accumulate additively, both across multiple uses of a tensor in
    one graph and across repeated calls.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("backward() called on a tensor that does not require grad")

    seed = np.ones_like(loss.data)
    loss.grad = seed if loss.grad is None else loss.grad + seed

    tape = ComputationTape.record(loss)
    for tensor in reversed(tape.entries):
        node = tensor._node
        grads = node.backward(tensor.grad)
        for parent, grad in zip(node.parents, grads):
            if grad is None or not parent.requires_grad:
                continue
            grad = grad.astype(parent.dtype, copy=False)
            parent.grad = grad.copy() if parent.grad is None else parent.grad + grad


# Shape helpers

def _check_elementwise(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return
    raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} are not compatible")


def _reduce_to(grad: np.ndarray, like: np.ndarray) -> np.ndarray:
    if like.ndim == 0 and grad.ndim != 0:
        return np.asarray(grad.sum(), dtype=grad.dtype)
    return grad


# Elementwise operations

class Add(Function):
    def forward(self, a, b):
        _check_elementwise(a, b, "add")
        self.a, self.b = a, b
        return a + b

    def backward(self, grad):
        return _reduce_to(grad, self.a), _reduce_to(grad, self.b)


class Sub(Function):
    def forward(self, a, b):
        _check_elementwise(a, b, "sub")
        self.a, self.b = a, b
        return a - b

    def backward(self, grad):
        return _reduce_to(grad, self.a), _reduce_to(-grad, self.b)


class Mul(Function):
    def forward(self, a, b):
        _check_elementwise(a, b, "mul")
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return _reduce_to(grad * self.b, self.a), _reduce_to(grad * self.a, self.b)


class ScalarMul(Function):
    def forward(self, a, factor):
        self.factor = factor
        return a * a.dtype.type(factor)

    def backward(self, grad):
        return (grad * grad.dtype.type(self.factor),)


class ReLU(Function):
    def forward(self, a):
        self.mask = a > 0
        # NaN passes through so non-finite losses surface
        return np.maximum(a, a.dtype.type(0))

    def backward(self, grad):
        return (grad * self.mask,)


class Sigmoid(Function):
    def forward(self, a):
        out = np.empty_like(a)
        positive = a >= 0
        out[positive] = 1.0 / (1.0 + np.exp(-a[positive]))
        exp_a = np.exp(a[~positive])
        out[~positive] = exp_a / (1.0 + exp_a)
        self.out = out
        return out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class Square(Function):
    def forward(self, a):
        self.a = a
        return a * a

    def backward(self, grad):
        return (grad * 2.0 * self.a,)


class Sqrt(Function):
    def forward(self, a):
        self.out = np.sqrt(a)
        return self.out

    def backward(self, grad):
        with np.errstate(divide="ignore"):
            return (grad * 0.5 / self.out,)


# Reductions

class Sum(Function):
    def forward(self, a, axis=None):
        self.shape, self.axis = a.shape, axis
        return np.asarray(a.sum(axis=axis), dtype=a.dtype)

    def backward(self, grad):
        if self.axis is None:
            return (np.broadcast_to(grad, self.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(grad, self.axis), self.shape).copy(),)


class Mean(Function):
    def forward(self, a):
        self.shape = a.shape
        return np.asarray(a.mean(), dtype=a.dtype)

    def backward(self, grad):
        count = int(np.prod(self.shape)) if self.shape else 1
        return (np.broadcast_to(grad / count, self.shape).copy(),)


# Linear algebra and layout

class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        return grad @ self.b.T, self.a.T @ grad


class BiasAdd(Function):
    """Add a per-feature bias vector along axis 1"""

    def forward(self, a, bias):
        if bias.ndim != 1 or a.ndim < 2 or a.shape[1] != bias.shape[0]:
            raise DimensionError(f"bias_add: bias {bias.shape} does not fit {a.shape}")
        self.axes = tuple(i for i in range(a.ndim) if i != 1)
        shape = [1] * a.ndim
        shape[1] = bias.shape[0]
        return a + bias.reshape(shape)

    def backward(self, grad):
        return grad, grad.sum(axis=self.axes)


class Reshape(Function):
    def forward(self, a, shape):
        self.original = a.shape
        try:
            return a.reshape(shape)
        except ValueError as exc:
            raise DimensionError(f"reshape: {a.shape} -> {shape}: {exc}") from exc

    def backward(self, grad):
        return (grad.reshape(self.original),)


class SliceRows(Function):
    def forward(self, a, start, stop):
        if not 0 <= start <= stop <= a.shape[0]:
            raise DimensionError(f"slice_rows: [{start}:{stop}] outside {a.shape[0]} rows")
        self.shape, self.start, self.stop = a.shape, start, stop
        return a[start:stop]

    def backward(self, grad):
        full = np.zeros(self.shape, dtype=grad.dtype)
        full[self.start:self.stop] = grad
        return (full,)


# Functional aliases

def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def add(a: Tensor, b: Tensor) -> Tensor:
    return a + b


def sub(a: Tensor, b: Tensor) -> Tensor:
    return a - b


def mul(a: Tensor, b: Tensor) -> Tensor:
    return Mul.apply(a, a._coerce(b))


def scalar_mul(a: Tensor, factor: float) -> Tensor:
    return ScalarMul.apply(a, factor=float(factor))


def relu(a: Tensor) -> Tensor:
    return ReLU.apply(a)


def sigmoid(a: Tensor) -> Tensor:
    return Sigmoid.apply(a)


def square(a: Tensor) -> Tensor:
    return Square.apply(a)


def sqrt(a: Tensor) -> Tensor:
    return Sqrt.apply(a)


def tensor_sum(a: Tensor, axis: Optional[int] = None) -> Tensor:
    return Sum.apply(a, axis=axis)


def mean(a: Tensor) -> Tensor:
    return Mean.apply(a)


def bias_add(a: Tensor, bias: Tensor) -> Tensor:
    return BiasAdd.apply(a, bias)
