"""
Tests for training logs, triplet mining and both training phases
"""

import inspect
import os
import sys

import numpy as np
import pytest

# Add the repository root to the path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import Tensor, no_grad  # noqa: E402
from src.data import Dataset, SplitSpec, load_mnist, split  # noqa: E402
from src.models import Autoencoder, read_checkpoint  # noqa: E402
from src.nn import Adam, triplet_loss  # noqa: E402
from src.training import (  # noqa: E402
    PHASE1,
    PHASE2,
    EpochRecord,
    ReconstructionTrainer,
    TrainingCoordinator,
    TrainLog,
    mine_from_embeddings,
    mine_triplets,
    train_phase1,
    train_phase2,
    triplet_arrays,
    triplet_loss_value,
)
from src.utils.config import RunConfig  # noqa: E402
from src.utils.errors import ContractError, MiningError, NumericAbortError  # noqa: E402
from tests.idx_fixtures import synthetic_digits  # noqa: E402


def synthetic_dataset(count, seed=0):
    images, labels = synthetic_digits(count, seed)
    return Dataset(images=(images.astype(np.float32) / 255.0)[:, None], labels=labels.astype(np.int64))


def state_copy(model):
    return {name: value.copy() for name, value in model.state_dict().items()}


class TestTrainLog:
    """Test cases for TrainLog"""

    def setup_method(self):
        """Setup test fixtures"""
        self.log = TrainLog()
        self.log.append(EpochRecord(phase=PHASE1, epoch=1, train_loss=0.5, val_loss=0.25))
        self.log.append(EpochRecord(phase=PHASE1, epoch=2, train_loss=0.125, val_loss=0.1))
        self.log.append(EpochRecord(phase=PHASE2, epoch=1, train_loss=0.75, val_loss=0.5))

    def test_epochs_strictly_increase(self):
        """Repeating or going back an epoch within a phase is refused"""
        with pytest.raises(ContractError):
            self.log.append(EpochRecord(phase=PHASE1, epoch=2, train_loss=0.1, val_loss=0.1))
        assert len(self.log.phase(PHASE1)) == 2
        assert self.log.last().phase == PHASE2

    def test_csv_text(self):
        """Header and value formatting of the CSV form"""
        lines = self.log.to_csv_text().splitlines()
        assert lines[0] == "phase,epoch,train_loss,val_loss,seconds"
        assert lines[1] == "phase1,1,0.5,0.25,0"
        assert len(lines) == 4

    def test_csv_round_trip(self, tmp_path):
        """Reading a written log gives the same records and fingerprint"""
        path = self.log.to_csv(tmp_path / "log.csv")
        restored = TrainLog.from_csv(path)
        assert [r.model_dump() for r in restored.records] == [r.model_dump() for r in self.log.records]
        assert restored.fingerprint() == self.log.fingerprint()

    def test_record_validation(self):
        """Epochs start at one"""
        with pytest.raises(ValueError):
            EpochRecord(phase=PHASE1, epoch=0, train_loss=0.0, val_loss=0.0)


class TestMining:
    """Test cases for unsupervised triplet mining"""

    def setup_method(self):
        """Setup test fixtures"""
        rng = np.random.default_rng(12)
        z = rng.normal(size=(60, 8))
        self.z = z / np.linalg.norm(z, axis=1, keepdims=True)

    def test_one_triplet_per_point(self):
        """Every point is an anchor exactly once"""
        triplets = mine_from_embeddings(self.z, threshold=0.5, seed=0, block_size=16)
        anchor, positive, negative = triplet_arrays(triplets)
        np.testing.assert_array_equal(np.sort(anchor), np.arange(60))
        assert np.all(positive != anchor)
        assert np.all(negative != anchor)

    def test_positive_is_nearest_neighbour(self):
        """Positives match a brute-force nearest-neighbour search"""
        for triplet in mine_from_embeddings(self.z, threshold=0.5, seed=3, block_size=7):
            best, best_distance = -1, np.inf
            for j in range(len(self.z)):
                if j == triplet.anchor:
                    continue
                distance = float(np.sum((self.z[triplet.anchor] - self.z[j]) ** 2))
                if distance < best_distance:
                    best, best_distance = j, distance
            assert triplet.positive == best

    def test_negative_beyond_threshold(self):
        """Negatives are farther than the threshold when such points exist"""
        for triplet in mine_from_embeddings(self.z, threshold=0.5, seed=4):
            assert not triplet.fallback
            assert np.linalg.norm(self.z[triplet.anchor] - self.z[triplet.negative]) > 0.5

    def test_equilateral_triangle(self):
        """Three mutually distant points pair with each other"""
        side = 1.2
        z = np.array([[0.0, 0.0], [side, 0.0], [side / 2, side * np.sqrt(3) / 2]])
        triplets = mine_from_embeddings(z, threshold=0.5, seed=0)
        assert len(triplets) == 3
        for triplet in triplets:
            assert triplet.positive != triplet.anchor
            assert triplet.negative != triplet.anchor
            assert not triplet.fallback

    def test_fallback_on_identical_points(self):
        """Without any distant point the farthest point is used and flagged"""
        triplets = mine_from_embeddings(np.ones((5, 3)), threshold=0.5, seed=0)
        assert all(t.fallback for t in triplets)
        assert all(t.negative != t.anchor for t in triplets)

    def test_negative_is_uniform(self):
        """Both distant candidates are drawn about equally often"""
        z = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [0.0, 5.0]])
        counts = {2: 0, 3: 0}
        for seed in range(400):
            triplet = next(t for t in mine_from_embeddings(z, 0.5, seed) if t.anchor == 0)
            counts[triplet.negative] += 1
        assert 140 < counts[2] < 260
        assert counts[2] + counts[3] == 400

    def test_thousand_image_run(self):
        """1,000 embedded images: brute-force nearest positives, distant or flagged negatives"""
        model = Autoencoder(seed=0)
        images = synthetic_dataset(1000, seed=11).images
        triplets = mine_triplets(model, images, threshold=0.5, seed=2)
        z = model.embed(images).astype(np.float64)
        assert len(triplets) == 1000
        for triplet in triplets:
            distances = np.sum((z - z[triplet.anchor]) ** 2, axis=1)
            distances[triplet.anchor] = np.inf
            assert distances[triplet.positive] == pytest.approx(distances.min(), abs=1e-12)
            distances[triplet.anchor] = 0.0
            if triplet.fallback:
                assert not np.any(distances > 0.25)
            else:
                assert np.sqrt(distances[triplet.negative]) > 0.5

    def test_seeded(self):
        """Same seed, same triplets"""
        assert mine_from_embeddings(self.z, seed=9) == mine_from_embeddings(self.z, seed=9)

    def test_labels_never_reach_mining(self):
        """Mining only ever receives images or embeddings"""
        for fn in (mine_triplets, mine_from_embeddings):
            assert "labels" not in inspect.signature(fn).parameters

    def test_too_few_points(self):
        """Mining needs at least three samples"""
        with pytest.raises(MiningError):
            mine_from_embeddings(np.zeros((2, 4)))
        with pytest.raises(MiningError):
            mine_triplets(Autoencoder(seed=0), np.zeros((2, 1, 28, 28), dtype=np.float32))

    def test_loss_value_matches_graph_loss(self):
        """The numpy triplet loss equals the differentiable one"""
        triplets = mine_from_embeddings(self.z, threshold=0.5, seed=1)
        anchor, positive, negative = triplet_arrays(triplets)
        graph = triplet_loss(Tensor(self.z[anchor]), Tensor(self.z[positive]), Tensor(self.z[negative]))
        assert triplet_loss_value(self.z, triplets) == pytest.approx(graph.item(), rel=1e-5)


class TestPhase1:
    """Test cases for reconstruction training"""

    def setup_method(self):
        """Setup test fixtures"""
        self.train_ds, self.val_ds = split(synthetic_dataset(40), SplitSpec(seed=0))

    def test_zero_epochs(self):
        """No epochs leave the model untouched"""
        model = Autoencoder(seed=0)
        before = state_copy(model)
        log = train_phase1(model, self.train_ds, self.val_ds, epochs=0)
        assert len(log) == 0
        for name, value in model.state_dict().items():
            np.testing.assert_array_equal(value, before[name])

    def test_one_epoch_is_reproducible(self):
        """Same seed and data give bit-identical weights and logs"""
        results = []
        for _ in range(2):
            model = Autoencoder(seed=0)
            log = train_phase1(
                model, self.train_ds, self.val_ds, epochs=1, batch=16, seed=0, record_wall_time=False
            )
            results.append((model, log))
        (first, first_log), (second, second_log) = results
        assert first_log.fingerprint() == second_log.fingerprint()
        assert first_log.records[0].seconds == 0.0
        assert np.isfinite(first_log.records[0].val_loss)
        for name, value in first.state_dict().items():
            np.testing.assert_array_equal(value, second.state_dict()[name])

    def test_nan_aborts(self):
        """A non-finite loss stops training with its position"""
        model = Autoencoder(seed=0)
        model.decoder.fc.bias.data[:] = np.nan
        with pytest.raises(NumericAbortError) as excinfo:
            train_phase1(model, self.train_ds, self.val_ds, epochs=2, batch=16)
        error = excinfo.value
        assert error.exit_code == 4
        assert (error.phase, error.epoch, error.batch_index) == (PHASE1, 1, 0)

    @pytest.mark.slow
    @pytest.mark.mnist
    def test_desk_scale_loss_halves(self, real_mnist_dir):
        """Three epochs on 2,000 real digits at least halve the first-batch loss"""
        train_ds, val_ds = split(load_mnist(real_mnist_dir, "train").head(2000), SplitSpec(seed=0))
        model = Autoencoder(seed=0)
        trainer = ReconstructionTrainer(
            model, Adam(model.named_parameters()), train_ds, val_ds, record_wall_time=False
        )
        log = trainer.fit(3)
        assert log.records[-1].train_loss < 0.5 * trainer.batch_losses[0]
        assert log.records[-1].val_loss < log.records[0].val_loss

    @pytest.mark.slow
    @pytest.mark.mnist
    def test_reconstruction_beats_random_code(self, real_mnist_dir):
        """After training, decode(encode(x)) is closer to x than decoding a random unit code"""
        train_ds, val_ds = split(load_mnist(real_mnist_dir, "train").head(2000), SplitSpec(seed=0))
        model = Autoencoder(seed=0)
        train_phase1(model, train_ds, val_ds, epochs=3, record_wall_time=False)

        reconstruction_mse = model.reconstruction_error(val_ds.images)
        z = np.random.default_rng(1).normal(size=(len(val_ds), 64))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        model.eval()
        with no_grad():
            decoded = model.decode(Tensor(z.astype(np.float32))).numpy()
        random_mse = float(np.mean((decoded - val_ds.images) ** 2))
        assert reconstruction_mse < random_mse


class TestPhase2:
    """Test cases for triplet fine-tuning"""

    def setup_method(self):
        """Setup test fixtures"""
        ds = synthetic_dataset(36, seed=3)
        self.mining = ds.images[:24]
        self.val = ds.images[24:]

    def test_zero_epochs(self):
        """No epochs leave the model untouched"""
        model = Autoencoder(seed=1)
        before = state_copy(model)
        assert len(train_phase2(model, self.mining, self.val, epochs=0)) == 0
        for name, value in model.state_dict().items():
            np.testing.assert_array_equal(value, before[name])

    def test_decoder_untouched_with_fresh_optimizer(self):
        """The triplet loss never reaches the decoder"""
        model = Autoencoder(seed=1)
        before = state_copy(model)
        # unit-norm squared distances never exceed 4, so every hinge stays active
        log = train_phase2(
            model, self.mining, self.val, epochs=1, margin=4.0, batch=8, seed=0, record_wall_time=False
        )
        assert [r.phase for r in log.records] == [PHASE2]
        assert log.records[0].train_loss > 0.0
        for name, value in model.named_parameters().items():
            if name.startswith("decoder."):
                np.testing.assert_array_equal(value.data, before[name])
        assert not np.array_equal(
            model.encoder.fc.weight.data, before["encoder.fc.weight"]
        )

    def test_shared_optimizer_continues(self):
        """Phase 2 keeps counting the Phase 1 optimizer steps"""
        model = Autoencoder(seed=2)
        optimizer = Adam(model.named_parameters())
        ds = synthetic_dataset(20, seed=4)
        train_ds, val_ds = split(ds, SplitSpec(seed=0))
        train_phase1(model, train_ds, val_ds, epochs=1, batch=8, optimizer=optimizer)
        steps = optimizer.steps
        assert steps == 2
        train_phase2(model, self.mining, self.val, epochs=1, batch=8, optimizer=optimizer)
        assert optimizer.steps == steps + 3

    @pytest.mark.slow
    @pytest.mark.mnist
    def test_desk_scale_loss_falls(self, real_mnist_dir):
        """2,000 mining samples, two epochs: the second epoch's triplet loss is lower"""
        train_ds, val_ds = split(load_mnist(real_mnist_dir, "train").head(2500), SplitSpec(seed=0))
        model = Autoencoder(seed=0)
        optimizer = Adam(model.named_parameters())
        train_phase1(model, train_ds, val_ds, epochs=3, optimizer=optimizer, record_wall_time=False)
        log = train_phase2(
            model, train_ds.images, val_ds.images, epochs=2, optimizer=optimizer, record_wall_time=False
        )
        assert len(train_ds) == 2000
        first, second = log.records
        assert second.train_loss < first.train_loss


class TestTrainingCoordinator:
    """Test cases for TrainingCoordinator"""

    def setup_method(self):
        """Setup test fixtures"""
        self.dataset = synthetic_dataset(40, seed=5)

    def _config(self, tmp_path, **overrides):
        values = dict(
            output_dir=tmp_path, phase1_epochs=1, phase2_epochs=1, batch=16,
            mining_subset=20, record_wall_time=False,
        )
        values.update(overrides)
        return RunConfig(**values)

    def test_requires_initialize(self, tmp_path):
        """Running before initialize is an error"""
        with pytest.raises(RuntimeError):
            TrainingCoordinator(self._config(tmp_path)).run()

    def test_phase1_only(self, tmp_path):
        """Only the Phase 1 checkpoint and log rows are written"""
        coordinator = TrainingCoordinator(self._config(tmp_path))
        coordinator.initialize(self.dataset)
        status = coordinator.get_status()
        assert (status["train_samples"], status["validation_samples"]) == (32, 8)

        result = coordinator.run(phase1_only=True)
        assert set(result["checkpoints"]) == {PHASE1}
        assert read_checkpoint(result["checkpoints"][PHASE1]).optimizer.t == 2
        log = TrainLog.from_csv(result["train_log"])
        assert [r.phase for r in log.records] == [PHASE1]

    def test_full_run_is_reproducible(self, tmp_path):
        """Two runs with one seed write byte-identical logs"""
        fingerprints = []
        for name in ("a", "b"):
            coordinator = TrainingCoordinator(self._config(tmp_path / name))
            coordinator.initialize(self.dataset)
            result = coordinator.run()
            assert set(result["checkpoints"]) == {PHASE1, PHASE2}
            assert result["epochs"] == 2
            fingerprints.append(result["log_fingerprint"])
        assert fingerprints[0] == fingerprints[1]
        assert (tmp_path / "a" / "train_log.csv").read_bytes() == (tmp_path / "b" / "train_log.csv").read_bytes()

    def test_train_subset(self, tmp_path):
        """train_subset keeps only the first images"""
        coordinator = TrainingCoordinator(self._config(tmp_path, train_subset=20))
        coordinator.initialize(self.dataset)
        assert coordinator.get_status()["train_samples"] == 16
        assert len(coordinator.mining_images) == 16
