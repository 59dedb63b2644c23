"""
MNIST IDX loading, train/validation splitting and mini-batch iteration
"""

import gzip
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy as np
from loguru import logger

from ..autodiff import Tensor
from ..utils.errors import (
    DatasetNotFoundError,
    IdxCountMismatchError,
    IdxFormatError,
    IdxTruncatedError,
    InsufficientDataError,
)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
NUM_CLASSES = 10

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """Images [N, 1, 28, 28] in [0, 1] and digit labels (evaluation only)"""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise IdxCountMismatchError(f"{len(self.images)} images but {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.images[indices], self.labels[indices])

    def head(self, count: Optional[int]) -> "Dataset":
        if count is None or count >= len(self):
            return self
        return Dataset(self.images[:count], self.labels[:count])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DatasetNotFoundError(f"IDX file not found: {path}")
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as handle:
            return handle.read()
    return path.read_bytes()


def _header(payload: bytes, fields: int, path: PathLike) -> Tuple[int, ...]:
    size = 4 * fields
    if len(payload) < size:
        raise IdxTruncatedError(f"{path}: header needs {size} bytes, file has {len(payload)}")
    return tuple(int(v) for v in np.frombuffer(payload[:size], dtype=">u4"))


def read_idx_images(path: PathLike) -> np.ndarray:
    """Raw uint8 images [N, rows, cols] from an IDX3 file"""
    payload = _read_bytes(path)
    magic, count, rows, cols = _header(payload, 4, path)
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(f"{path}: image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    expected = count * rows * cols
    body = payload[16:]
    if len(body) < expected:
        raise IdxTruncatedError(f"{path}: expected {expected} pixel bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8, count=expected).reshape(count, rows, cols)


def read_idx_labels(path: PathLike) -> np.ndarray:
    """Raw uint8 labels [N] from an IDX1 file"""
    payload = _read_bytes(path)
    magic, count = _header(payload, 2, path)
    if magic != LABEL_MAGIC:
        raise IdxFormatError(f"{path}: label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    body = payload[8:]
    if len(body) < count:
        raise IdxTruncatedError(f"{path}: expected {count} label bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8, count=count)


def load_idx(images_path: PathLike, labels_path: PathLike) -> Dataset:
    """
    Load an IDX image/label pair as a normalised dataset

    Pixels are divided by 255 and laid out as [N, 1, rows, cols].
    """
    raw_images = read_idx_images(images_path)
    raw_labels = read_idx_labels(labels_path)
    if len(raw_images) != len(raw_labels):
        raise IdxCountMismatchError(
            f"{images_path} holds {len(raw_images)} images but {labels_path} holds {len(raw_labels)} labels"
        )
    if raw_labels.size and raw_labels.max() >= NUM_CLASSES:
        raise IdxFormatError(f"{labels_path}: label {raw_labels.max()} outside 0..{NUM_CLASSES - 1}")

    images = (raw_images.astype(np.float32) / np.float32(255.0))[:, None, :, :]
    labels = raw_labels.astype(np.int64)
    logger.info(f"Loaded {len(labels)} samples from {Path(images_path).name}")
    return Dataset(images=images, labels=labels)


def _resolve(data_dir: Path, name: str) -> Path:
    for candidate in (data_dir / name, data_dir / f"{name}.gz"):
        if candidate.exists():
            return candidate
    raise DatasetNotFoundError(f"{name}[.gz] not found in {data_dir}")


def load_mnist(data_dir: PathLike, kind: str = "train") -> Dataset:
    """Load the standard MNIST ``train`` or ``test`` files from a directory"""
    if kind not in MNIST_FILES:
        raise ValueError(f"kind must be one of {sorted(MNIST_FILES)}, got {kind!r}")
    data_dir = Path(data_dir)
    images_name, labels_name = MNIST_FILES[kind]
    return load_idx(_resolve(data_dir, images_name), _resolve(data_dir, labels_name))


def split(ds: Dataset, spec: SplitSpec = SplitSpec()) -> Tuple[Dataset, Dataset]:
    """
    Seeded disjoint split into ceil(fraction * N) training and remaining samples

    Both parts are kept non-empty.
    """
    n = len(ds)
    if n < 2:
        raise InsufficientDataError(f"cannot split a dataset of {n} samples")
    n_train = math.ceil(round(spec.train_fraction * n, 9))
    n_train = min(max(n_train, 1), n - 1)

    order = np.random.default_rng(spec.seed).permutation(n)
    train_idx = np.sort(order[:n_train])
    val_idx = np.sort(order[n_train:])
    return ds.subset(train_idx), ds.subset(val_idx)


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    """Independent child seed for (seed, keys...), e.g. one per epoch"""
    entropy = [int(seed)]
    for key in keys:
        entropy.append(key if isinstance(key, int) else int.from_bytes(str(key).encode("utf-8"), "little"))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def index_batches(n: int, batch_size: int = 128, shuffle: bool = False, seed: int = 0) -> Iterator[np.ndarray]:
    """Index arrays covering 0..n-1 exactly once; the last batch may be smaller"""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def batches(ds: Dataset, batch_size: int = 128, shuffle: bool = False, seed: int = 0) -> Iterator[Tensor]:
    """Mini-batches of images as tensors"""
    for indices in index_batches(len(ds), batch_size, shuffle, seed):
        yield Tensor(ds.images[indices])


def class_histogram(ds: Dataset, num_classes: int = NUM_CLASSES) -> np.ndarray:
    """Number of samples per digit class"""
    return np.bincount(ds.labels, minlength=num_classes)
