# Autoencoder model and checkpoint persistence
from .autoencoder import (
    DEFAULT_LATENT_DIM,
    EXPECTED_PARAMETERS,
    Autoencoder,
    Decoder,
    Encoder,
    count_parameters,
)
from .checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    Checkpoint,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
    write_checkpoint,
)

__all__ = [
    "DEFAULT_LATENT_DIM",
    "EXPECTED_PARAMETERS",
    "FORMAT_VERSION",
    "MAGIC",
    "Autoencoder",
    "Checkpoint",
    "Decoder",
    "Encoder",
    "count_parameters",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
    "write_checkpoint",
]
