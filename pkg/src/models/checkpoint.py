"""
Binary checkpoint format

Layout (all integers little-endian):

    magic            8 bytes  b"LCAECKPT"
    version          uint32
    phase            uint16 length + UTF-8 bytes
    epoch            uint32
    has_optimizer    uint8
    [optimizer]      uint32 step, float64 lr, beta1, beta2, eps   (only if has_optimizer)
    tensor_count     uint32
    per tensor:
        name         uint16 length + UTF-8 bytes
        rank         uint8
        dims         uint32 * rank
        payload      float32 * prod(dims)

Optimizer moments are stored as tensors named ``adam.m/<param>`` and
``adam.v/<param>`` after the model tensors.
"""

import struct
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from loguru import logger

from ..nn import AdamState
from ..utils.errors import (
    CheckpointIOError,
    CheckpointShapeError,
    CheckpointVersionError,
    CorruptCheckpointError,
    DimensionError,
)
from .autoencoder import DEFAULT_LATENT_DIM, Autoencoder

MAGIC = b"LCAECKPT"
FORMAT_VERSION = 1
_M_PREFIX = "adam.m/"
_V_PREFIX = "adam.v/"

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    tensors: "OrderedDict[str, np.ndarray]"
    phase: str = "init"
    epoch: int = 0
    optimizer: Optional[AdamState] = None
    version: int = FORMAT_VERSION


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise CorruptCheckpointError(
                f"checkpoint truncated: needed {size} bytes at offset {self.offset}, "
                f"{len(self.payload) - self.offset} left"
            )
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def text(self) -> str:
        (length,) = self.unpack("<H")
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptCheckpointError(f"invalid UTF-8 in checkpoint: {exc}") from exc


def _pack_text(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _pack_tensor(name: str, array: np.ndarray) -> bytes:
    header = _pack_text(name) + struct.pack("<B", array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    return header + np.ascontiguousarray(array, dtype="<f4").tobytes()


def write_checkpoint(checkpoint: Checkpoint, path: PathLike) -> None:
    tensors = OrderedDict(checkpoint.tensors)
    optimizer = checkpoint.optimizer
    if optimizer is not None:
        for name, moment in optimizer.m.items():
            tensors[_M_PREFIX + name] = moment
        for name, moment in optimizer.v.items():
            tensors[_V_PREFIX + name] = moment

    chunks = [MAGIC, struct.pack("<I", checkpoint.version), _pack_text(checkpoint.phase)]
    chunks.append(struct.pack("<I", checkpoint.epoch))
    if optimizer is None:
        chunks.append(struct.pack("<B", 0))
    else:
        chunks.append(struct.pack("<B", 1))
        chunks.append(struct.pack("<I4d", optimizer.t, optimizer.lr, optimizer.beta1, optimizer.beta2, optimizer.eps))
    chunks.append(struct.pack("<I", len(tensors)))
    chunks.extend(_pack_tensor(name, np.asarray(array)) for name, array in tensors.items())

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as exc:
        raise CheckpointIOError(f"cannot write checkpoint {path}: {exc}") from exc
    logger.info(f"Checkpoint written to {path} ({len(tensors)} tensors, phase={checkpoint.phase})")


def read_checkpoint(path: PathLike) -> Checkpoint:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as exc:
        raise CheckpointIOError(f"cannot read checkpoint {path}: {exc}") from exc

    reader = _Reader(payload)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CorruptCheckpointError(f"{path} is not a checkpoint (bad magic)")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")

    phase = reader.text()
    (epoch,) = reader.unpack("<I")
    (has_optimizer,) = reader.unpack("<B")
    optimizer = None
    if has_optimizer:
        t, lr, beta1, beta2, eps = reader.unpack("<I4d")
        optimizer = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=t)

    (count,) = reader.unpack("<I")
    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for _ in range(count):
        name = reader.text()
        (rank,) = reader.unpack("<B")
        dims = reader.unpack(f"<{rank}I") if rank else ()
        size = int(np.prod(dims)) if dims else 1
        array = np.frombuffer(reader.take(4 * size), dtype="<f4").astype(np.float32).reshape(dims)
        if name.startswith(_M_PREFIX) and optimizer is not None:
            optimizer.m[name[len(_M_PREFIX):]] = array
        elif name.startswith(_V_PREFIX) and optimizer is not None:
            optimizer.v[name[len(_V_PREFIX):]] = array
        else:
            tensors[name] = array

    if reader.offset != len(payload):
        raise CorruptCheckpointError(f"{path}: {len(payload) - reader.offset} trailing bytes")

    return Checkpoint(tensors=tensors, phase=phase, epoch=epoch, optimizer=optimizer, version=version)


def save_checkpoint(
    model: Autoencoder,
    path: PathLike,
    phase: str = "init",
    epoch: int = 0,
    optimizer_state: Optional[AdamState] = None
) -> None:
    """Persist every parameter and running statistic of ``model``"""
    write_checkpoint(
        Checkpoint(tensors=model.state_dict(), phase=phase, epoch=epoch, optimizer=optimizer_state),
        path
    )


def load_checkpoint(path: PathLike, latent_dim: int = DEFAULT_LATENT_DIM) -> Autoencoder:
    """Rebuild an autoencoder of the given latent size from a checkpoint"""
    checkpoint = read_checkpoint(path)
    model = Autoencoder(latent_dim=latent_dim)
    try:
        model.load_state_dict(checkpoint.tensors)
    except DimensionError as exc:
        raise CheckpointShapeError(f"{path}: {exc}") from exc
    model.eval()
    logger.info(f"Loaded checkpoint {path} (phase={checkpoint.phase}, epoch={checkpoint.epoch})")
    return model
