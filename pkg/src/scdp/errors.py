"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: argument errors -> 2, data errors -> 3,
training errors -> 4, integrity errors -> 5.
"""


class ScdpError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(ScdpError, ValueError):
    """Tensor dimension mismatch; message names both offending shapes."""


class ArgumentError(ScdpError, ValueError):
    """Invalid argument outside of tensor shapes (bad tag, bad range)."""


class DataError(ScdpError):
    """Problems producing or consuming persisted or sampled data."""


class SamplingError(DataError):
    """Rejection-sampling budget exhausted while drawing a scene."""


class DatasetLoadError(DataError):
    """Malformed dataset file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class CheckpointError(DataError):
    """Base class for checkpoint read failures."""


class CheckpointMagicError(CheckpointError):
    """File does not start with the expected magic bytes."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointTruncatedError(CheckpointError):
    """File ended before the declared payload was read."""


class NormalizerError(DataError):
    """Degenerate statistics (min == max) while fitting a normalizer."""


class DegenerateSceneError(DataError):
    """Scene geometry does not admit the requested construction."""


class TrainingError(ScdpError):
    """Non-finite loss or gradient encountered during optimization."""


class IntegrityError(ScdpError):
    """Frozen tensors changed or a checkpoint hash stopped matching."""
