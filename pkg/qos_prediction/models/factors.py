"""Latent-factor parameters and training traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .region import BiasVectors


@dataclass
class FiemfParams:
    """U (m x d), S (n x d), biases and the frozen per-user bias centers ``mu``.

    PMF and BiasedMF reuse the same container with ``mu`` set to zeros (or the
    global mean when an offset is requested).
    """

    U: np.ndarray
    S: np.ndarray
    biases: BiasVectors
    mu: np.ndarray

    @property
    def num_users(self) -> int:
        return int(self.U.shape[0])

    @property
    def num_services(self) -> int:
        return int(self.S.shape[0])

    @property
    def dim(self) -> int:
        return int(self.U.shape[1])

    def copy(self) -> "FiemfParams":
        return FiemfParams(
            U=self.U.copy(),
            S=self.S.copy(),
            biases=self.biases.copy(),
            mu=self.mu.copy(),
        )

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.U))
            and np.all(np.isfinite(self.S))
            and self.biases.is_finite()
        )

    def flat(self) -> np.ndarray:
        """Concatenate the trainable parameters (U, S, b, p) into one vector."""
        return np.concatenate(
            [self.U.ravel(), self.S.ravel(), self.biases.b, self.biases.p]
        )


@dataclass
class TrainingTrace:
    """Per-epoch history of one SGD run."""

    losses: List[float] = field(default_factory=list)
    train_rmse: List[float] = field(default_factory=list)
    learning_rates: List[float] = field(default_factory=list)
    mean_updates: List[float] = field(default_factory=list)
    initial_loss: Optional[float] = None
    initial_rmse: Optional[float] = None
    converged: bool = False
    stop_epoch: Optional[int] = None

    @property
    def epochs(self) -> int:
        return len(self.losses)

    def record(
        self, *, loss: float, rmse: float, learning_rate: float, mean_update: float
    ) -> None:
        self.losses.append(float(loss))
        self.train_rmse.append(float(rmse))
        self.learning_rates.append(float(learning_rate))
        self.mean_updates.append(float(mean_update))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "losses": list(self.losses),
            "train_rmse": list(self.train_rmse),
            "learning_rates": list(self.learning_rates),
            "mean_updates": list(self.mean_updates),
            "initial_loss": self.initial_loss,
            "initial_rmse": self.initial_rmse,
            "converged": self.converged,
            "stop_epoch": self.stop_epoch,
        }


@dataclass
class FactorGradients:
    """Full-batch gradient of an objective with respect to U, S, b and p."""

    U: np.ndarray
    S: np.ndarray
    b: np.ndarray
    p: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.U.ravel(), self.S.ravel(), self.b, self.p])


@dataclass(frozen=True)
class EntryGradients:
    """Gradient contributions of one observed entry (i, j)."""

    u: np.ndarray
    s: np.ndarray
    b: float
    p: float


__all__ = ["EntryGradients", "FactorGradients", "FiemfParams", "TrainingTrace"]
