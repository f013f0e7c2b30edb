"""Error types raised by the QoS prediction workflow."""

from __future__ import annotations

from typing import Optional, Sequence


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""

    def __init__(self, message: str, *, line_number: Optional[int] = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DatasetIntegrityError(ValueError):
    """Raised when a dataset parses but violates an integrity constraint."""

    def __init__(self, message: str, *, missing_ids: Sequence[int] = ()) -> None:
        super().__init__(message)
        self.missing_ids = tuple(missing_ids)


class CheckpointMismatchError(ValueError):
    """Raised when a checkpoint does not belong to the dataset it is loaded against."""


class TrainingDivergenceError(RuntimeError):
    """Raised when SGD produces non-finite parameters or an exploding loss."""

    def __init__(self, message: str, *, epoch: int, last_finite_loss: Optional[float]) -> None:
        super().__init__(f"{message} (epoch {epoch}, last finite loss {last_finite_loss})")
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss


__all__ = [
    "CheckpointMismatchError",
    "DatasetFormatError",
    "DatasetIntegrityError",
    "TrainingDivergenceError",
]
