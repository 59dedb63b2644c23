"""
Exception hierarchy shared by every package module
"""

from typing import Optional


class LatentClusterError(Exception):
    """Base class for all errors raised by the clustering engine"""

    exit_code: int = 1


# Configuration

class ConfigError(LatentClusterError):
    """Invalid or inconsistent run configuration"""

    exit_code = 2


class TsneConfigError(ConfigError):
    """t-SNE settings that cannot be satisfied for the given input"""


# Data and persistence

class DataError(LatentClusterError):
    """Input data could not be read or is malformed"""

    exit_code = 3


class DatasetNotFoundError(DataError):
    pass


class IdxFormatError(DataError):
    """Wrong magic number or header layout in an IDX file"""


class IdxTruncatedError(DataError):
    """IDX payload shorter than its header announces"""


class IdxCountMismatchError(DataError):
    """Image and label files disagree on the number of items"""


class CheckpointError(DataError):
    pass


class CheckpointIOError(CheckpointError):
    pass


class CorruptCheckpointError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


# Numerics

class NumericAbortError(LatentClusterError):
    """Training produced a non-finite loss"""

    exit_code = 4

    def __init__(self, phase: str, epoch: int, batch_index: int, value: Optional[float] = None):
        self.phase = phase
        self.epoch = epoch
        self.batch_index = batch_index
        self.value = value
        super().__init__(
            f"Non-finite loss ({value}) in {phase} at epoch {epoch}, batch {batch_index}"
        )


# Library contracts

class DimensionError(LatentClusterError, ValueError):
    """Operand shapes are incompatible"""


class ContractError(LatentClusterError):
    """A documented precondition was violated by the caller"""


class DegenerateBatchError(ContractError):
    pass


class EmptyBatchError(ContractError):
    pass


class InsufficientDataError(ContractError):
    pass


class UndefinedMetricError(ContractError):
    """Metric is mathematically undefined for the given labelling"""


class MiningError(ContractError):
    pass
