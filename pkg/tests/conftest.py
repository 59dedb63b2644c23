"""
Shared fixtures
"""

import os
import sys
from pathlib import Path

import pytest

# Add the repository root to the path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.utils.logger import setup_logger  # noqa: E402
from tests.idx_fixtures import write_synthetic_mnist  # noqa: E402


@pytest.fixture
def mnist_dir(tmp_path):
    """Directory holding a tiny synthetic MNIST (60 train, 30 test images)"""
    return write_synthetic_mnist(tmp_path / "mnist")


@pytest.fixture
def real_mnist_dir():
    """Real MNIST files from LATENT_CLUSTER_DATA_DIR, or skip"""
    value = os.getenv("LATENT_CLUSTER_DATA_DIR")
    if not value or not (Path(value) / "t10k-images-idx3-ubyte").exists() and not (
        Path(value) / "t10k-images-idx3-ubyte.gz"
    ).exists():
        pytest.skip("LATENT_CLUSTER_DATA_DIR does not point at the MNIST files")
    return Path(value)


@pytest.fixture(autouse=True)
def reset_logging():
    """Rebind the stdout sink after tests that capture output"""
    yield
    setup_logger("INFO")
