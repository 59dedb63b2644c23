"""
Setup script for Latent Cluster
"""

from pathlib import Path

from setuptools import setup, find_packages

HERE = Path(__file__).parent
DEV_PACKAGES = ("pytest", "black")


def read_requirements(name="requirements.txt"):
    """Pinned packages from the requirements file, split into runtime and dev"""
    lines = (HERE / name).read_text(encoding="utf-8").splitlines()
    pinned = [line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")]
    runtime = [req for req in pinned if not req.startswith(DEV_PACKAGES)]
    dev = [req for req in pinned if req.startswith(DEV_PACKAGES)]
    return runtime, dev


runtime_requirements, dev_requirements = read_requirements()

setup(
    name="latent-cluster",
    version="1.0.0",
    description="Deep unsupervised clustering of handwritten digits with a triplet-trained convolutional autoencoder",
    long_description=(HERE / "README.md").read_text(encoding="utf-8"),
    long_description_content_type="text/markdown",
    packages=find_packages(include=("src", "src.*")),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=runtime_requirements,
    extras_require={"dev": dev_requirements},
    entry_points={"console_scripts": ["latent-cluster=main:main"]},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Image Recognition",
    ],
)
