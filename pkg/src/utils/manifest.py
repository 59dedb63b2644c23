"""
Manifest of the files produced by a pipeline run
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, Union

from loguru import logger
from pydantic import BaseModel, Field

PathLike = Union[str, Path]
MANIFEST_NAME = "manifest.json"


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class PipelineManifest(BaseModel):
    """Config snapshot plus every produced file with its content hash"""

    config: Dict[str, Any] = Field(default_factory=dict)
    checkpoints: Dict[str, str] = Field(default_factory=dict)
    reports: Dict[str, str] = Field(default_factory=dict)
    artifacts: Dict[str, str] = Field(default_factory=dict)

    def _add(self, section: Dict[str, str], path: PathLike) -> None:
        section[str(path)] = file_sha256(path)

    def add_checkpoint(self, path: PathLike) -> None:
        self._add(self.checkpoints, path)

    def add_report(self, path: PathLike) -> None:
        self._add(self.reports, path)

    def add_artifact(self, path: PathLike) -> None:
        self._add(self.artifacts, path)

    def files(self) -> Dict[str, str]:
        return {**self.checkpoints, **self.reports, **self.artifacts}

    def verify(self) -> Dict[str, bool]:
        """Whether each listed file still matches its recorded hash"""
        return {
            path: Path(path).exists() and file_sha256(path) == digest
            for path, digest in self.files().items()
        }

    def save(self, output_dir: PathLike, name: str = MANIFEST_NAME) -> Path:
        path = Path(output_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Manifest written to {path} ({len(self.files())} files)")
        return path

    @classmethod
    def load(cls, path: PathLike) -> "PipelineManifest":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
