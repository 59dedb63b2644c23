#!/usr/bin/env python3
"""
Quick start script for Latent Cluster
"""

import os
import sys
import subprocess
from pathlib import Path

MNIST_FILES = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
]


def check_python_version():
    """Check if Python version is compatible"""
    if sys.version_info < (3, 9):
        print("❌ Python 3.9 or higher is required")
        print(f"Current version: {sys.version}")
        return False
    print(f"✅ Python version: {sys.version.split()[0]}")
    return True


def check_dependencies():
    """Check if required dependencies are installed"""
    try:
        import numpy
        import scipy
        import pandas
        import matplotlib
        import pydantic
        import loguru
        print("✅ Core dependencies found")
        return True
    except ImportError as e:
        print(f"❌ Missing dependencies: {e}")
        print("Run: pip install -r requirements.txt")
        return False


def check_env_file():
    """Check if .env exists and points at the MNIST files"""
    env_path = Path(".env")
    if not env_path.exists():
        print("⚠️  .env file not found")
        print("Creating .env from template...")

        example_path = Path(".env.example")
        if example_path.exists():
            env_path.write_text(example_path.read_text())
            print("✅ Created .env file from template")
            print("📝 Please edit LATENT_CLUSTER_DATA_DIR in .env")
        else:
            print("❌ .env.example not found")
            return False

    from dotenv import load_dotenv

    load_dotenv()
    data_dir = Path(os.getenv("LATENT_CLUSTER_DATA_DIR", "data/mnist"))
    missing = [
        name for name in MNIST_FILES
        if not (data_dir / name).exists() and not (data_dir / f"{name}.gz").exists()
    ]
    if missing:
        print(f"⚠️  MNIST files missing in {data_dir}: {', '.join(missing)}")
        return False

    print(f"✅ MNIST files found in {data_dir}")
    return True


def create_directories():
    """Create necessary directories"""
    for dir_name in ["outputs", "outputs/logs"]:
        Path(dir_name).mkdir(parents=True, exist_ok=True)
    print("✅ Directories created")


def test_system():
    """Build the model and take one training step on random images"""
    print("\n🧪 Testing system...")

    try:
        import numpy as np

        from src.models import EXPECTED_PARAMETERS, Autoencoder
        from src.nn import Adam, mse_loss
        from src.autodiff import Tensor, backward

        model = Autoencoder(seed=0)
        print(f"✅ Autoencoder built with {model.num_parameters()} parameters (expected {EXPECTED_PARAMETERS})")

        images = Tensor(np.random.default_rng(0).random((8, 1, 28, 28)))
        optimizer = Adam(model.named_parameters())
        loss = mse_loss(model(images), images)
        backward(loss)
        optimizer.step()
        print(f"✅ Training step ran, reconstruction loss {loss.item():.4f}")
        return True

    except Exception as e:
        print(f"❌ System test failed: {e}")
        return False


def run_cli(*args):
    """Run one main.py subcommand"""
    try:
        subprocess.run([sys.executable, "main.py", *args], check=True)
    except KeyboardInterrupt:
        print("\n👋 Stopped")
    except subprocess.CalledProcessError as e:
        print(f"❌ Command failed with exit code {e.returncode}")


def main():
    """Main function"""
    print("🔢 Latent Cluster - Quick Start")
    print("=" * 60)

    # Check prerequisites
    if not check_python_version():
        return

    if not check_dependencies():
        print("\n📦 Installing dependencies...")
        try:
            subprocess.run([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"],
                           check=True)
            print("✅ Dependencies installed")
        except subprocess.CalledProcessError:
            print("❌ Failed to install dependencies")
            return

    data_ready = check_env_file()
    create_directories()

    # Ask user what they want to do
    print("\n🎯 What would you like to do?")
    print("1. Test the system (quick test, no data needed)")
    print("2. Desk-scale training (5,000 samples, 3 + 2 epochs)")
    print("3. Evaluate the pixel baselines")
    print("4. Run unit tests")

    choice = input("\nEnter your choice (1-4): ").strip()

    if choice == "1":
        test_system()

    elif choice in ("2", "3") and not data_ready:
        print("\n⚠️  Configure LATENT_CLUSTER_DATA_DIR in .env and run again")

    elif choice == "2":
        print("\n🏋️  Training...")
        run_cli(
            "train", "--subset", "5000", "--phase1-epochs", "3",
            "--phase2-epochs", "2", "--mining-subset", "2000"
        )

    elif choice == "3":
        print("\n📊 Evaluating baselines...")
        for method in ("raw_pixels", "pca50"):
            run_cli("evaluate", "--method", method)

    elif choice == "4":
        print("\n🧪 Running unit tests...")
        try:
            subprocess.run([sys.executable, "-m", "pytest", "tests/", "-v", "-m", "not slow and not mnist"],
                           check=True)
        except subprocess.CalledProcessError:
            print("❌ Tests failed")

    else:
        print("❌ Invalid choice")


if __name__ == "__main__":
    main()
