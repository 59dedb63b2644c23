"""
Tests for configuration resolution and the command-line pipeline
"""

import json
import os
import sys
from pathlib import Path

import pandas as pd
import pytest

# Add the repository root to the path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from main import main  # noqa: E402
from src.cli import build_parser, cmd_evaluate, cmd_inspect_checkpoint, cmd_train, config_overrides  # noqa: E402
from src.utils.config import DATA_DIR_ENV, RunConfig, load_run_config  # noqa: E402
from src.utils.errors import ConfigError, NumericAbortError  # noqa: E402
from src.utils.manifest import PipelineManifest  # noqa: E402

METRIC_KEYS = [
    "silhouette", "davies_bouldin", "calinski_harabasz", "nmi",
    "ari", "aligned_accuracy", "n_samples", "k",
]


class TestRunConfig:
    """Test cases for load_run_config"""

    def setup_method(self):
        """Setup test fixtures"""
        self.defaults = RunConfig()

    def test_defaults(self):
        """Documented defaults"""
        cfg = self.defaults
        assert (cfg.seed, cfg.lr, cfg.batch, cfg.latent_dim, cfg.margin) == (0, 0.001, 128, 64, 1.0)
        assert (cfg.phase1_epochs, cfg.phase2_epochs) == (12, 5)
        assert (cfg.mining_subset, cfg.neg_threshold, cfg.k) == (20000, 0.5, 10)
        assert cfg.pca_components == 50
        assert cfg.nmi_variant == "arithmetic"
        assert cfg.tsne_perplexity == 30.0
        assert cfg.tsne_points == 3000

    def test_file_then_overrides(self, tmp_path, monkeypatch):
        """Flags beat the file, the file beats the defaults"""
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 7, "k": 4, "lr": 0.01}))
        cfg = load_run_config(path, {"k": 6, "margin": None})
        assert (cfg.seed, cfg.k, cfg.lr, cfg.margin) == (7, 6, 0.01, 1.0)

    def test_unknown_key(self, tmp_path):
        """Misspelt keys are configuration errors"""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"learning_rate": 0.1}))
        with pytest.raises(ConfigError) as excinfo:
            load_run_config(path)
        assert excinfo.value.exit_code == 2

    def test_invalid_values(self, tmp_path):
        """Out-of-range values, bad JSON and missing files are refused"""
        with pytest.raises(ConfigError):
            load_run_config(overrides={"k": 1})
        with pytest.raises(ConfigError):
            load_run_config(overrides={"nmi_variant": "max"})
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_run_config(bad)
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.json")

    def test_environment_fallback(self, tmp_path, monkeypatch):
        """data_dir comes from the environment when not given"""
        monkeypatch.setenv(DATA_DIR_ENV, str(tmp_path))
        assert load_run_config().data_dir == tmp_path
        assert load_run_config(overrides={"data_dir": tmp_path / "x"}).data_dir == tmp_path / "x"

    def test_missing_data_dir(self, monkeypatch):
        """Pipelines need a data directory"""
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        with pytest.raises(ConfigError):
            load_run_config().require_data_dir()

    def test_tsne_config(self):
        """t-SNE keys carry over with the root seed"""
        tsne = RunConfig(seed=3, tsne_perplexity=12.0).tsne_config()
        assert (tsne.perplexity, tsne.seed, tsne.iterations) == (12.0, 3, 1000)


class TestParser:
    """Test cases for the argument parser"""

    def setup_method(self):
        """Setup test fixtures"""
        self.parser = build_parser()

    def test_every_key_has_a_flag(self, capsys):
        """Help for a subcommand lists every configuration key"""
        with pytest.raises(SystemExit) as excinfo:
            main(["train", "--help"])
        assert excinfo.value.code == 0
        text = capsys.readouterr().out
        for name in RunConfig.model_fields:
            assert "--" + name.replace("_", "-") in text
        assert "--phase1-only" in text

    def test_overrides(self):
        """Only given flags become overrides; shorthands expand"""
        args = self.parser.parse_args(["train", "--epochs", "2", "--subset", "40", "--record-wall-time", "false"])
        overrides = config_overrides(args)
        assert overrides == {
            "record_wall_time": False, "phase1_epochs": 2, "phase2_epochs": 2, "train_subset": 40,
        }
        args = self.parser.parse_args(["evaluate", "--method", "pca50", "--subset", "100", "--k", "5"])
        assert config_overrides(args) == {"k": 5, "eval_subset": 100}

    def test_sample_size_alias(self):
        """--sample-size and --silhouette-sample-size set the same key"""
        short = self.parser.parse_args(["evaluate", "--method", "raw_pixels", "--sample-size", "500"])
        long = self.parser.parse_args(["evaluate", "--method", "raw_pixels", "--silhouette-sample-size", "500"])
        assert config_overrides(short) == config_overrides(long) == {"silhouette_sample_size": 500}

    def test_rejects_bad_flags(self):
        """Unknown choices and malformed booleans stop at parse time"""
        with pytest.raises(SystemExit):
            self.parser.parse_args(["evaluate", "--method", "umap"])
        with pytest.raises(SystemExit):
            self.parser.parse_args(["train", "--record-wall-time", "maybe"])
        with pytest.raises(SystemExit):
            self.parser.parse_args(["visualize"])


class TestExitCodes:
    """Test cases for main's exit codes"""

    def test_config_error(self, tmp_path):
        """Unknown config keys exit with 2"""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"epochs": 3}))
        assert main(["train", "--config", str(path), "--output-dir", str(tmp_path / "out")]) == 2

    def test_evaluate_without_checkpoint(self, mnist_dir, tmp_path):
        """The embedding method needs a checkpoint"""
        code = main(["evaluate", "--data-dir", str(mnist_dir), "--output-dir", str(tmp_path / "out")])
        assert code == 2

    def test_no_data_dir(self, tmp_path, monkeypatch):
        """Without --data-dir or the environment variable the run is misconfigured"""
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        assert main(["evaluate", "--method", "raw_pixels", "--output-dir", str(tmp_path / "out")]) == 2

    def test_missing_data_files(self, tmp_path):
        """An empty data directory is a data error"""
        (tmp_path / "empty").mkdir()
        code = main([
            "evaluate", "--method", "raw_pixels",
            "--data-dir", str(tmp_path / "empty"), "--output-dir", str(tmp_path / "out"),
        ])
        assert code == 3

    def test_numeric_abort(self, mnist_dir, tmp_path, monkeypatch):
        """A non-finite loss exits with 4"""
        def explode(self, phase1_only=False):
            raise NumericAbortError("phase1", 1, 0, float("nan"))

        monkeypatch.setattr("src.cli.commands.TrainingCoordinator.run", explode)
        code = main(["train", "--data-dir", str(mnist_dir), "--output-dir", str(tmp_path / "out")])
        assert code == 4


class TestPipeline:
    """End-to-end runs on a tiny synthetic MNIST"""

    def train(self, data_dir, output_dir, *extra):
        return main([
            "train", "--epochs", "1", "--subset", "40", "--batch", "16",
            "--record-wall-time", "false",
            "--data-dir", str(data_dir), "--output-dir", str(output_dir), *extra,
        ])

    def test_train_inspect_evaluate_visualize_compare(self, mnist_dir, tmp_path, capsys):
        """Every subcommand runs and writes its files"""
        out = tmp_path / "out"
        assert self.train(mnist_dir, out, "--phase1-only") == 0
        checkpoint = out / "phase1.ckpt"
        assert checkpoint.exists()
        assert not (out / "phase2.ckpt").exists()
        assert pd.read_csv(out / "train_log.csv")["phase"].tolist() == ["phase1"]

        summary = cmd_inspect_checkpoint(checkpoint)
        assert summary["trainable_parameters"] == 442433
        assert summary["encoder_parameters"] + summary["decoder_parameters"] == 442433
        assert summary["phase"] == "phase1"
        capsys.readouterr()
        assert main(["inspect-checkpoint", str(checkpoint)]) == 0
        assert '"trainable_parameters": 442433' in capsys.readouterr().out

        common = ["--data-dir", str(mnist_dir), "--output-dir", str(out), "--pca-components", "5"]
        assert main(["evaluate", "--method", "raw_pixels", *common]) == 0
        metrics = json.loads((out / "metrics_raw_pixels.json").read_text())
        assert list(metrics) == METRIC_KEYS
        assert (metrics["n_samples"], metrics["k"]) == (30, 10)
        assert len(pd.read_csv(out / "assignments_raw_pixels.csv")) == 30

        assert main(["evaluate", "--method", "pca50", *common]) == 0
        assert main(["evaluate", "--checkpoint", str(checkpoint), "--subset", "20", *common]) == 0
        assert json.loads((out / "metrics_triplet_ae.json").read_text())["n_samples"] == 20

        assert main([
            "visualize", "--checkpoint", str(checkpoint), *common,
            "--tsne-points", "30", "--tsne-perplexity", "5", "--tsne-iterations", "100",
        ]) == 0
        for name in ("embeddings.csv", "tsne.csv", "tsne.svg", "silhouette_bars.svg",
                     "class_distribution.svg", "samples.svg"):
            assert (out / name).exists()
        projection = pd.read_csv(out / "tsne.csv")
        assert len(projection) == 30
        assert list(projection.columns) == ["id", "x", "y", "cluster", "label"]

        assert main(["compare", "--checkpoint", str(checkpoint), *common]) == 0
        table = pd.read_csv(out / "comparison.csv")
        assert table["method"].tolist() == ["triplet_ae", "raw_pixels", "pca50"]

        manifest = PipelineManifest.load(out / "manifest.json")
        assert str(checkpoint) in manifest.checkpoints
        assert all(manifest.verify().values())

    def test_evaluation_is_reproducible(self, mnist_dir, tmp_path):
        """Same config, same metrics file"""
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / run
            assert main([
                "evaluate", "--method", "raw_pixels",
                "--data-dir", str(mnist_dir), "--output-dir", str(out),
            ]) == 0
            outputs.append((out / "metrics_raw_pixels.json").read_bytes())
        assert outputs[0] == outputs[1]

    def test_training_is_reproducible(self, mnist_dir, tmp_path):
        """Two full runs with wall time off give identical logs and checkpoints"""
        for run in ("a", "b"):
            assert self.train(mnist_dir, tmp_path / run) == 0
        for name in ("train_log.csv", "phase1.ckpt", "phase2.ckpt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.slow
@pytest.mark.mnist
class TestRealDigits:
    """Test cases for the published baselines and the desk-scale pipeline on the real test set"""

    def test_raw_pixel_baseline(self, real_mnist_dir, tmp_path):
        """KMeans on raw pixels over all 10,000 test digits"""
        report = cmd_evaluate(RunConfig(data_dir=real_mnist_dir, output_dir=tmp_path), method="raw_pixels")
        assert report.n_samples == 10000
        assert report.silhouette == pytest.approx(0.0589, abs=0.02)
        assert report.nmi == pytest.approx(0.5015, abs=0.05)
        assert report.ari == pytest.approx(0.3834, abs=0.05)

    def test_pca_baseline(self, real_mnist_dir, tmp_path):
        """KMeans on 50 principal components over all 10,000 test digits"""
        report = cmd_evaluate(RunConfig(data_dir=real_mnist_dir, output_dir=tmp_path), method="pca50")
        assert report.silhouette == pytest.approx(0.0845, abs=0.02)

    def test_desk_scale_embeddings_beat_pixels(self, real_mnist_dir, tmp_path):
        """Three reconstruction epochs on 5,000 digits and two triplet epochs on 2,000"""
        config = RunConfig(
            data_dir=real_mnist_dir, output_dir=tmp_path, train_subset=5000, phase1_epochs=3,
            phase2_epochs=2, mining_subset=2000, eval_subset=2000, record_wall_time=False,
        )
        result = cmd_train(config)
        embedded = cmd_evaluate(config, checkpoint=Path(result["checkpoints"]["phase2"]), method="triplet_ae")
        pixels = cmd_evaluate(config, method="raw_pixels")
        assert embedded.n_samples == pixels.n_samples == 2000
        assert embedded.silhouette >= 1.5 * pixels.silhouette
        assert embedded.ari >= 0.25
