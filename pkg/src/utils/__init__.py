# Logging, errors, configuration and run manifests
from .config import DATA_DIR_ENV, RunConfig, load_run_config, read_config_file
from .logger import setup_logger
from .manifest import PipelineManifest, file_sha256

__all__ = [
    "DATA_DIR_ENV",
    "PipelineManifest",
    "RunConfig",
    "file_sha256",
    "load_run_config",
    "read_config_file",
    "setup_logger",
]
