"""
Tests for the convolutional autoencoder and its checkpoint format
"""

import os
import struct
import sys

import numpy as np
import pytest

# Add the repository root to the path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import Tensor, gradcheck, precision  # noqa: E402
from src.models import (  # noqa: E402
    EXPECTED_PARAMETERS,
    MAGIC,
    Autoencoder,
    count_parameters,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from src.nn import AdamState, mse_loss  # noqa: E402
from src.utils.errors import (  # noqa: E402
    CheckpointIOError,
    CheckpointShapeError,
    CheckpointVersionError,
    CorruptCheckpointError,
    DimensionError,
)


class TestAutoencoder:
    """Test cases for Autoencoder"""

    def setup_method(self):
        """Setup test fixtures"""
        self.model = Autoencoder(seed=0)
        self.images = np.random.default_rng(0).random((4, 1, 28, 28)).astype(np.float32)

    def test_parameter_count(self):
        """Encoder and decoder add up to the published total"""
        assert count_parameters(self.model) == EXPECTED_PARAMETERS == 442_433
        assert count_parameters(self.model.encoder) == 219_776
        assert count_parameters(self.model.decoder) == 222_657

    def test_describe(self):
        """The summary splits the parameter count between encoder and decoder"""
        summary = self.model.describe()
        assert summary["name"] == "Autoencoder"
        assert summary["latent_dim"] == 64
        assert summary["parameters"] == 442_433
        assert (summary["encoder_parameters"], summary["decoder_parameters"]) == (219_776, 222_657)

    def test_buffers_are_not_parameters(self):
        """Running statistics live in the state but are not trained"""
        buffers = self.model.named_buffers()
        assert len(buffers) == 6
        assert set(buffers).isdisjoint(self.model.named_parameters())
        assert len(self.model.state_dict()) == len(self.model.named_parameters()) + 6

    def test_intermediate_shapes(self):
        """28 -> 14 -> 7 on the way down, 7 -> 14 -> 28 on the way up"""
        x = Tensor(self.images)
        features = self.model.encoder.features
        h1 = features.relu1(features.bn1(features.conv1(x)))
        h2 = features.conv2(h1)
        assert h1.shape == (4, 32, 14, 14)
        assert h2.shape == (4, 64, 7, 7)

        z = self.model.encode(x)
        upsample = self.model.decoder.upsample
        u = upsample.reshape(upsample.relu0(self.model.decoder.fc(z)))
        u1 = upsample.deconv1(u)
        assert u.shape == (4, 64, 7, 7)
        assert u1.shape == (4, 32, 14, 14)
        assert self.model.decode(z).shape == (4, 1, 28, 28)

    def test_embeddings_on_unit_sphere(self):
        """Every latent row has norm one"""
        z = self.model.embed(self.images)
        assert z.shape == (4, 64)
        np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, atol=1e-5)

    def test_reconstructions_in_unit_interval(self):
        """The sigmoid head keeps pixels inside (0, 1)"""
        recon = self.model.reconstructions(self.images)
        assert recon.shape == (4, 1, 28, 28)
        assert recon.min() > 0.0 and recon.max() < 1.0
        assert self.model.reconstructions(self.images[:0]).shape == (0, 1, 28, 28)

    def test_shape_errors(self):
        """encode and decode check their input shapes"""
        with pytest.raises(DimensionError):
            self.model.encode(Tensor(np.zeros((2, 1, 27, 28))))
        with pytest.raises(DimensionError):
            self.model.decode(Tensor(np.zeros((2, 32))))

    def test_embed_restores_mode_and_statistics(self):
        """Inference leaves train mode and running statistics as they were"""
        before = {k: v.copy() for k, v in self.model.state_dict().items()}
        self.model.train()
        self.model.embed(self.images, batch_size=3)
        self.model.reconstruction_error(self.images)
        assert self.model.training
        for name, value in self.model.state_dict().items():
            np.testing.assert_array_equal(value, before[name])

    def test_batched_embedding_matches_single_pass(self):
        """Eval-mode chunking does not change the result"""
        np.testing.assert_allclose(
            self.model.embed(self.images, batch_size=1),
            self.model.embed(self.images, batch_size=4),
            atol=1e-6,
        )

    def test_seeded_initialisation(self):
        """Same seed, same weights; different seed, different weights"""
        again = Autoencoder(seed=0)
        other = Autoencoder(seed=1)
        weight = "encoder.features.conv1.weight"
        np.testing.assert_array_equal(self.model.state_dict()[weight], again.state_dict()[weight])
        assert not np.array_equal(self.model.state_dict()[weight], other.state_dict()[weight])

    def test_full_model_gradcheck(self):
        """Sampled parameter gradients of the reconstruction loss in 64-bit mode, h=1e-4"""
        with precision(np.float64):
            model = Autoencoder(seed=2)
            rng = np.random.default_rng(2)
            images = Tensor(rng.random((2, 1, 28, 28)))
            target = Tensor(rng.random((2, 1, 28, 28)))
            error = gradcheck(
                lambda: mse_loss(model(images), target),
                model.parameters(),
                max_checks=3,
                skip_kinks=True,
            )
        assert error < 1e-3


class TestCheckpoint:
    """Test cases for checkpoint persistence"""

    def setup_method(self):
        """Setup test fixtures"""
        self.model = Autoencoder(seed=5)
        self.model.encoder.features.bn1.running_mean.data[:] = 0.5

    def test_round_trip(self, tmp_path):
        """Every parameter and running statistic survives exactly"""
        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path, phase="phase1", epoch=7)
        restored = load_checkpoint(path)
        assert not restored.training
        for name, value in self.model.state_dict().items():
            np.testing.assert_array_equal(restored.state_dict()[name], value)

        checkpoint = read_checkpoint(path)
        assert checkpoint.phase == "phase1"
        assert checkpoint.epoch == 7
        assert checkpoint.optimizer is None

    def test_optimizer_state(self, tmp_path):
        """Adam moments and step counter are stored alongside the weights"""
        state = AdamState.for_params(self.model.named_parameters(), lr=0.002)
        state.t = 42
        name = "decoder.fc.bias"
        state.m[name][:] = 0.125
        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path, "phase2", 3, state)

        optimizer = read_checkpoint(path).optimizer
        assert optimizer.t == 42
        assert optimizer.lr == 0.002
        assert set(optimizer.m) == set(self.model.named_parameters())
        np.testing.assert_array_equal(optimizer.m[name], 0.125)

    def test_header_layout(self, tmp_path):
        """Magic then a little-endian version word"""
        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path)
        payload = path.read_bytes()
        assert payload[:8] == MAGIC
        assert struct.unpack("<I", payload[8:12]) == (1,)

    def test_deterministic_bytes(self, tmp_path):
        """Saving the same model twice writes identical files"""
        save_checkpoint(self.model, tmp_path / "a.ckpt")
        save_checkpoint(self.model, tmp_path / "b.ckpt")
        assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()

    def test_corruption(self, tmp_path):
        """Bad magic, truncation and trailing bytes are rejected"""
        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path)
        payload = path.read_bytes()

        broken = tmp_path / "broken.ckpt"
        broken.write_bytes(b"NOTACKPT" + payload[8:])
        with pytest.raises(CorruptCheckpointError):
            read_checkpoint(broken)

        broken.write_bytes(payload[:-10])
        with pytest.raises(CorruptCheckpointError):
            read_checkpoint(broken)

        broken.write_bytes(payload + b"\x00")
        with pytest.raises(CorruptCheckpointError):
            read_checkpoint(broken)

    def test_version_mismatch(self, tmp_path):
        """A different format version is refused"""
        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path)
        payload = bytearray(path.read_bytes())
        payload[8:12] = struct.pack("<I", 2)
        path.write_bytes(bytes(payload))
        with pytest.raises(CheckpointVersionError):
            read_checkpoint(path)

    def test_missing_and_mismatched(self, tmp_path):
        """Absent files and latent-size mismatches map to checkpoint errors"""
        with pytest.raises(CheckpointIOError) as excinfo:
            read_checkpoint(tmp_path / "absent.ckpt")
        assert excinfo.value.exit_code == 3

        path = tmp_path / "model.ckpt"
        save_checkpoint(self.model, path)
        with pytest.raises(CheckpointShapeError):
            load_checkpoint(path, latent_dim=32)
