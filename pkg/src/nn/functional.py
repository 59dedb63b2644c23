"""
Differentiable layer kernels: convolution, transposed convolution, batch
normalisation and row normalisation

Convolutions use cross-correlation (no kernel flip). Patch extraction and
scatter loop over the kernel window, so every output element is reduced in the
same fixed order on every run.
"""

from typing import Tuple

import numpy as np

from ..autodiff import Function, Tensor
from ..utils.errors import DegenerateBatchError, DimensionError


def _extract_patches(padded: np.ndarray, kernel: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """[N, C, H, W] -> [N, C, k, k, out_h, out_w] strided windows"""
    n, c = padded.shape[:2]
    patches = np.empty((n, c, kernel, kernel, out_h, out_w), dtype=padded.dtype)
    for i in range(kernel):
        for j in range(kernel):
            patches[:, :, i, j] = padded[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride]
    return patches


def _scatter_patches(patches: np.ndarray, out_shape: Tuple[int, ...], stride: int) -> np.ndarray:
    """Adjoint of ``_extract_patches``: sum windows back onto a canvas"""
    kernel = patches.shape[2]
    rows, cols = patches.shape[-2:]
    canvas = np.zeros(out_shape, dtype=patches.dtype)
    for i in range(kernel):
        for j in range(kernel):
            canvas[:, :, i:i + stride * rows:stride, j:j + stride * cols:stride] += patches[:, :, i, j]
    return canvas


class Conv2dFunction(Function):
    def forward(self, x, weight, bias, stride, padding):
        if x.ndim != 4:
            raise DimensionError(f"conv2d expects [N, C, H, W], got {x.shape}")
        n, channels, height, width = x.shape
        out_channels, in_channels, kernel, _ = weight.shape
        if channels != in_channels:
            raise DimensionError(f"conv2d: input has {channels} channels, layer expects {in_channels}")
        if height + 2 * padding < kernel or width + 2 * padding < kernel:
            raise DimensionError(f"conv2d: input {height}x{width} smaller than kernel {kernel}")

        out_h = (height + 2 * padding - kernel) // stride + 1
        out_w = (width + 2 * padding - kernel) // stride + 1
        padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        patches = _extract_patches(padded, kernel, stride, out_h, out_w)

        self.weight, self.patches = weight, patches
        self.padded_shape, self.stride, self.padding = padded.shape, stride, padding
        self.in_hw = (height, width)

        out = np.tensordot(patches, weight, axes=([1, 2, 3], [1, 2, 3]))
        out = out.transpose(0, 3, 1, 2) + bias.reshape(1, out_channels, 1, 1)
        return np.ascontiguousarray(out)

    def backward(self, grad):
        grad_weight = np.tensordot(grad, self.patches, axes=([0, 2, 3], [0, 4, 5]))
        grad_bias = grad.sum(axis=(0, 2, 3))

        grad_patches = np.tensordot(grad, self.weight, axes=([1], [0])).transpose(0, 3, 4, 5, 1, 2)
        grad_padded = _scatter_patches(grad_patches, self.padded_shape, self.stride)
        height, width = self.in_hw
        p = self.padding
        grad_input = grad_padded[:, :, p:p + height, p:p + width]
        return np.ascontiguousarray(grad_input), grad_weight, grad_bias


class ConvTranspose2dFunction(Function):
    def forward(self, x, weight, bias, stride, padding, output_padding):
        if x.ndim != 4:
            raise DimensionError(f"conv_transpose2d expects [N, C, H, W], got {x.shape}")
        n, channels, height, width = x.shape
        in_channels, out_channels, kernel, _ = weight.shape
        if channels != in_channels:
            raise DimensionError(
                f"conv_transpose2d: input has {channels} channels, layer expects {in_channels}"
            )

        out_h = (height - 1) * stride - 2 * padding + kernel + output_padding
        out_w = (width - 1) * stride - 2 * padding + kernel + output_padding
        full_h = max((height - 1) * stride + kernel, padding + out_h)
        full_w = max((width - 1) * stride + kernel, padding + out_w)

        patches = np.tensordot(x, weight, axes=([1], [0])).transpose(0, 3, 4, 5, 1, 2)
        full = _scatter_patches(patches, (n, out_channels, full_h, full_w), stride)

        self.x, self.weight = x, weight
        self.full_shape, self.stride, self.padding = full.shape, stride, padding
        self.out_hw = (out_h, out_w)

        out = full[:, :, padding:padding + out_h, padding:padding + out_w]
        return np.ascontiguousarray(out + bias.reshape(1, out_channels, 1, 1))

    def backward(self, grad):
        out_h, out_w = self.out_hw
        p = self.padding
        full = np.zeros(self.full_shape, dtype=grad.dtype)
        full[:, :, p:p + out_h, p:p + out_w] = grad

        kernel = self.weight.shape[2]
        height, width = self.x.shape[2:]
        grad_patches = _extract_patches(full, kernel, self.stride, height, width)

        grad_input = np.tensordot(grad_patches, self.weight, axes=([1, 2, 3], [1, 2, 3])).transpose(0, 3, 1, 2)
        grad_weight = np.tensordot(self.x, grad_patches, axes=([0, 2, 3], [0, 4, 5]))
        grad_bias = grad.sum(axis=(0, 2, 3))
        return np.ascontiguousarray(grad_input), grad_weight, grad_bias


class BatchNorm2dFunction(Function):
    def forward(self, x, gamma, beta, running_mean, running_var, training, momentum, eps):
        if x.ndim != 4 or x.shape[1] != gamma.shape[0]:
            raise DimensionError(f"batch_norm2d: input {x.shape} does not match {gamma.shape[0]} channels")
        channels = x.shape[1]
        count = x.shape[0] * x.shape[2] * x.shape[3]
        shape = (1, channels, 1, 1)

        if training:
            if count < 2:
                raise DegenerateBatchError(
                    f"batch_norm2d in train mode needs N*H*W >= 2 per channel, got {count}"
                )
            batch_mean = x.mean(axis=(0, 2, 3))
            batch_var = x.var(axis=(0, 2, 3))
            running_mean *= 1.0 - momentum
            running_mean += momentum * batch_mean
            running_var *= 1.0 - momentum
            running_var += momentum * batch_var * (count / (count - 1))
            mu, var = batch_mean, batch_var
        else:
            mu, var = running_mean, running_var

        inv_std = (1.0 / np.sqrt(var + eps)).astype(x.dtype)
        x_hat = (x - mu.reshape(shape)) * inv_std.reshape(shape)

        self.training, self.count = training, count
        self.x_hat, self.inv_std, self.gamma = x_hat, inv_std, gamma
        return gamma.reshape(shape) * x_hat + beta.reshape(shape)

    def backward(self, grad):
        shape = (1, self.gamma.shape[0], 1, 1)
        axes = (0, 2, 3)
        grad_beta = grad.sum(axis=axes)
        grad_gamma = (grad * self.x_hat).sum(axis=axes)
        grad_x_hat = grad * self.gamma.reshape(shape)

        if not self.training:
            return grad_x_hat * self.inv_std.reshape(shape), grad_gamma, grad_beta

        m = self.count
        grad_input = (self.inv_std.reshape(shape) / m) * (
            m * grad_x_hat
            - grad_x_hat.sum(axis=axes, keepdims=True)
            - self.x_hat * (grad_x_hat * self.x_hat).sum(axis=axes, keepdims=True)
        )
        return grad_input, grad_gamma, grad_beta


class L2NormalizeRows(Function):
    def forward(self, z, eps):
        if z.ndim != 2:
            raise DimensionError(f"l2_normalize_rows expects [N, D], got {z.shape}")
        norms = np.sqrt((z * z).sum(axis=1, keepdims=True))
        self.valid = norms >= eps
        self.norms = np.where(self.valid, norms, 1.0).astype(z.dtype)
        self.out = np.where(self.valid, z / self.norms, 0.0).astype(z.dtype)
        return self.out

    def backward(self, grad):
        projected = (grad * self.out).sum(axis=1, keepdims=True)
        grad_z = np.where(self.valid, (grad - self.out * projected) / self.norms, 0.0)
        return (grad_z.astype(grad.dtype),)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 2, padding: int = 1) -> Tensor:
    return Conv2dFunction.apply(x, weight, bias, stride=stride, padding=padding)


def conv_transpose2d(
    x: Tensor,
    weight: Tensor,
    bias: Tensor,
    stride: int = 2,
    padding: int = 1,
    output_padding: int = 1
) -> Tensor:
    return ConvTranspose2dFunction.apply(
        x, weight, bias, stride=stride, padding=padding, output_padding=output_padding
    )


def batch_norm2d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: Tensor,
    running_var: Tensor,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5
) -> Tensor:
    """Running statistics are updated in place when ``training`` is true"""
    return BatchNorm2dFunction.apply(
        x, gamma, beta,
        running_mean=running_mean.data,
        running_var=running_var.data,
        training=training,
        momentum=momentum,
        eps=eps,
    )


def l2_normalize_rows(z: Tensor, eps: float = 1e-12) -> Tensor:
    """Scale every row to unit Euclidean norm; rows with norm < eps become zeros"""
    return L2NormalizeRows.apply(z, eps=eps)
