"""
Convolutional autoencoder with an L2-normalised 64-d latent space
"""

from typing import Any, Dict

import numpy as np
from loguru import logger

from ..autodiff import Tensor, no_grad
from ..nn import (
    BatchNorm2d,
    Conv2d,
    ConvTranspose2d,
    Flatten,
    Linear,
    Module,
    ReLU,
    Reshape,
    Sequential,
    Sigmoid,
    l2_normalize_rows,
)
from ..utils.errors import ContractError, DimensionError

IMAGE_SHAPE = (1, 28, 28)
FEATURE_SHAPE = (64, 7, 7)
DEFAULT_LATENT_DIM = 64
EXPECTED_PARAMETERS = 442_433


def count_parameters(module: Module) -> int:
    """Element count of trainable tensors (batch-norm running stats excluded)"""
    return module.num_parameters()


class Encoder(Module):
    """Conv(1->32) BN ReLU, Conv(32->64) BN ReLU, flatten, Linear(3136->latent), L2 norm"""

    def __init__(self, latent_dim: int, rng: np.random.Generator):
        super().__init__()
        self.features = Sequential(
            conv1=Conv2d(1, 32, rng),
            bn1=BatchNorm2d(32),
            relu1=ReLU(),
            conv2=Conv2d(32, 64, rng),
            bn2=BatchNorm2d(64),
            relu2=ReLU(),
            flatten=Flatten(),
        )
        self.fc = Linear(int(np.prod(FEATURE_SHAPE)), latent_dim, rng)

    def forward(self, images: Tensor) -> Tensor:
        return l2_normalize_rows(self.fc(self.features(images)))


class Decoder(Module):
    """Linear(latent->3136) ReLU, reshape, ConvT(64->32) BN ReLU, ConvT(32->1), sigmoid"""

    def __init__(self, latent_dim: int, rng: np.random.Generator):
        super().__init__()
        self.fc = Linear(latent_dim, int(np.prod(FEATURE_SHAPE)), rng)
        self.upsample = Sequential(
            relu0=ReLU(),
            reshape=Reshape(*FEATURE_SHAPE),
            deconv1=ConvTranspose2d(64, 32, rng),
            bn1=BatchNorm2d(32),
            relu1=ReLU(),
            deconv2=ConvTranspose2d(32, 1, rng),
            sigmoid=Sigmoid(),
        )

    def forward(self, z: Tensor) -> Tensor:
        return self.upsample(self.fc(z))


class Autoencoder(Module):
    """
    Encoder/decoder pair used by both training phases

    Args:
        latent_dim: Size of the latent embedding
        seed: Seed of the weight initialisation
    """

    def __init__(self, latent_dim: int = DEFAULT_LATENT_DIM, seed: int = 0):
        super().__init__()
        rng = np.random.default_rng(seed)
        self.latent_dim = latent_dim
        self.encoder = Encoder(latent_dim, rng)
        self.decoder = Decoder(latent_dim, rng)

        if latent_dim == DEFAULT_LATENT_DIM and count_parameters(self) != EXPECTED_PARAMETERS:
            raise ContractError(
                f"autoencoder has {count_parameters(self)} parameters, expected {EXPECTED_PARAMETERS}"
            )

    def encode(self, images: Tensor) -> Tensor:
        if images.ndim != 4 or images.shape[1:] != IMAGE_SHAPE:
            raise DimensionError(f"encode expects [N, 1, 28, 28], got {images.shape}")
        return self.encoder(images)

    def decode(self, z: Tensor) -> Tensor:
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise DimensionError(f"decode expects [N, {self.latent_dim}], got {z.shape}")
        return self.decoder(z)

    def reconstruct(self, images: Tensor) -> Tensor:
        return self.decode(self.encode(images))

    def forward(self, images: Tensor) -> Tensor:
        return self.reconstruct(images)

    def embed(self, images: np.ndarray, batch_size: int = 512) -> np.ndarray:
        """
        Eval-mode embeddings of an image array without recording a graph

        The previous train/eval mode is restored afterwards.
        """
        was_training = self.training
        self.eval()
        try:
            chunks = []
            with no_grad():
                for start in range(0, len(images), batch_size):
                    chunks.append(self.encode(Tensor(images[start:start + batch_size])).data)
        finally:
            self.train(was_training)
        if not chunks:
            return np.zeros((0, self.latent_dim), dtype=np.float32)
        return np.concatenate(chunks, axis=0)

    def reconstructions(self, images: np.ndarray, batch_size: int = 512) -> np.ndarray:
        """Eval-mode reconstructions of an image array"""
        was_training = self.training
        self.eval()
        try:
            with no_grad():
                chunks = [
                    self.reconstruct(Tensor(images[start:start + batch_size])).data
                    for start in range(0, len(images), batch_size)
                ]
        finally:
            self.train(was_training)
        if not chunks:
            return np.zeros((0,) + IMAGE_SHAPE, dtype=np.float32)
        return np.concatenate(chunks, axis=0)

    def reconstruction_error(self, images: np.ndarray, batch_size: int = 512) -> float:
        """Eval-mode mean squared reconstruction error over an image array"""
        was_training = self.training
        self.eval()
        total, count = 0.0, 0
        try:
            with no_grad():
                for start in range(0, len(images), batch_size):
                    batch = images[start:start + batch_size]
                    recon = self.reconstruct(Tensor(batch)).data
                    total += float(np.square(recon - batch, dtype=np.float64).sum())
                    count += batch.size
        finally:
            self.train(was_training)
        return total / max(count, 1)

    def describe(self) -> Dict[str, Any]:
        status = super().describe()
        status.update({
            "latent_dim": self.latent_dim,
            "encoder_parameters": count_parameters(self.encoder),
            "decoder_parameters": count_parameters(self.decoder),
        })
        logger.debug(f"Autoencoder summary: {status['parameters']} trainable parameters")
        return status
