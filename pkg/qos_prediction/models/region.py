"""Region-bias data models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class RegionModel:
    """Region assignment plus the bias centers derived from a training matrix.

    ``user_means`` holds mu(i) for every user; ``region_means`` and
    ``region_counts`` describe each region as a whole (all of its users).
    """

    assignment: Tuple[str, ...]
    region_means: Dict[str, float]
    region_counts: Dict[str, int]
    global_mean: float
    user_means: np.ndarray
    include_self: bool = False

    @property
    def num_users(self) -> int:
        return len(self.assignment)

    def mu(self, user: int) -> float:
        return float(self.user_means[user])


@dataclass
class BiasVectors:
    """Per-user (``b``) and per-service (``p``) biases, mutated by the trainer."""

    b: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, num_users: int, num_services: int) -> "BiasVectors":
        return cls(
            b=np.zeros(num_users, dtype=np.float64),
            p=np.zeros(num_services, dtype=np.float64),
        )

    def copy(self) -> "BiasVectors":
        return BiasVectors(b=self.b.copy(), p=self.p.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.p)))


__all__ = ["BiasVectors", "RegionModel"]
