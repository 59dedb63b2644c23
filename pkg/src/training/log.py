"""
Per-epoch training records and their CSV form
"""

import hashlib
from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd
from pydantic import BaseModel, Field

from ..utils.errors import ContractError

LOG_COLUMNS = ["phase", "epoch", "train_loss", "val_loss", "seconds"]


class EpochRecord(BaseModel):
    phase: str
    epoch: int = Field(ge=1)
    train_loss: float
    val_loss: float
    seconds: float = Field(default=0.0, ge=0.0)


class TrainLog(BaseModel):
    """Ordered epoch records; epochs strictly increase within each phase"""

    records: List[EpochRecord] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: EpochRecord) -> None:
        previous = [r.epoch for r in self.records if r.phase == record.phase]
        if previous and record.epoch <= previous[-1]:
            raise ContractError(
                f"{record.phase} epoch {record.epoch} does not follow epoch {previous[-1]}"
            )
        self.records.append(record)

    def extend(self, records: Iterable[EpochRecord]) -> "TrainLog":
        for record in records:
            self.append(record)
        return self

    def phase(self, name: str) -> "TrainLog":
        return TrainLog(records=[r for r in self.records if r.phase == name])

    def last(self) -> EpochRecord:
        if not self.records:
            raise ContractError("training log is empty")
        return self.records[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.records], columns=LOG_COLUMNS)

    def to_csv_text(self) -> str:
        return self.to_frame().to_csv(index=False, float_format="%.10g", lineterminator="\n")

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TrainLog":
        frame = pd.read_csv(path, dtype={"phase": str})
        missing = [c for c in LOG_COLUMNS if c not in frame.columns]
        if missing:
            raise ContractError(f"{path}: missing log columns {missing}")
        return cls().extend(EpochRecord(**row) for row in frame[LOG_COLUMNS].to_dict("records"))

    def fingerprint(self) -> str:
        """SHA-256 of the CSV form; equal logs give equal fingerprints"""
        return hashlib.sha256(self.to_csv_text().encode("utf-8")).hexdigest()
