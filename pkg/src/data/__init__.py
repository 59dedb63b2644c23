# MNIST loading and batching
from .mnist import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    MNIST_FILES,
    NUM_CLASSES,
    Dataset,
    SplitSpec,
    batches,
    class_histogram,
    derive_seed,
    index_batches,
    load_idx,
    load_mnist,
    read_idx_images,
    read_idx_labels,
    split,
)

__all__ = [
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "MNIST_FILES",
    "NUM_CLASSES",
    "Dataset",
    "SplitSpec",
    "batches",
    "class_histogram",
    "derive_seed",
    "index_batches",
    "load_idx",
    "load_mnist",
    "read_idx_images",
    "read_idx_labels",
    "split",
]
