from __future__ import annotations

import logging
from typing import Any, Callable, ClassVar, Dict, Optional, Tuple

import numpy as np

from qos_prediction.models import NeighborTable, QosMatrix, RegionModel, TrainingTrace

logger = logging.getLogger(__name__)

ProgressHook = Callable[[int], None]


class BasePredictor:
    """Shared interface for QoS predictors.

    Subclasses implement :meth:`_fit` and :meth:`predict_raw`. :meth:`predict`
    clamps raw predictions to the training value range when ``clamp`` is set.
    """

    name: ClassVar[str] = "base"
    requires_regions: ClassVar[bool] = False
    requires_neighbors: ClassVar[bool] = False

    def __init__(self, *, clamp: bool = True) -> None:
        self.clamp = clamp
        self.value_range: Optional[Tuple[float, float]] = None
        self.shape: Optional[Tuple[int, int]] = None
        self.trace: Optional[TrainingTrace] = None
        self.last_clamp_count = 0

    @property
    def is_fitted(self) -> bool:
        return self.shape is not None

    def fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel] = None,
        neighbors: Optional[NeighborTable] = None,
        progress_hook: ProgressHook | None = None,
    ) -> "BasePredictor":
        if self.requires_regions and regions is None:
            raise ValueError(f"{self.name} needs a region model")
        if self.requires_neighbors and neighbors is None:
            raise ValueError(f"{self.name} needs a neighbor table")
        self.value_range = train.value_range
        self.shape = train.shape
        self._fit(train, regions=regions, neighbors=neighbors, progress_hook=progress_hook)
        return self

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        raise NotImplementedError("Subclasses must implement this method.")

    def predict_raw(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement this method.")

    def _check_indices(self, users: np.ndarray, services: np.ndarray) -> None:
        if self.shape is None:
            raise ValueError(f"{self.name} predictor is not fitted")
        num_users, num_services = self.shape
        if users.size and (users.min() < 0 or users.max() >= num_users):
            raise ValueError("user index out of range")
        if services.size and (services.min() < 0 or services.max() >= num_services):
            raise ValueError("service index out of range")

    def predict(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        services = np.asarray(services, dtype=np.int64)
        self._check_indices(users, services)
        raw = self.predict_raw(users, services)
        if not self.clamp or self.value_range is None:
            self.last_clamp_count = 0
            return raw
        low, high = self.value_range
        clamped = np.clip(raw, low, high)
        self.last_clamp_count = int(np.count_nonzero(clamped != raw))
        if self.last_clamp_count:
            logger.debug("%s clamped %d predictions", self.name, self.last_clamp_count)
        return clamped

    def predict_one(self, i: int, j: int) -> float:
        return float(self.predict(np.array([i]), np.array([j]))[0])

    def to_state(self) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
        """Header fields and arrays for a checkpoint."""
        if self.shape is None or self.value_range is None:
            raise ValueError(f"{self.name} predictor is not fitted")
        header = {
            "clamp": self.clamp,
            "value_range": list(self.value_range),
            "shape": list(self.shape),
            "hyperparameters": self.hyperparameters(),
        }
        return header, self._arrays()

    def load_state(self, header: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> None:
        self.clamp = bool(header.get("clamp", True))
        low, high = header["value_range"]
        self.value_range = (float(low), float(high))
        num_users, num_services = header["shape"]
        self.shape = (int(num_users), int(num_services))
        self._restore(arrays)

    def hyperparameters(self) -> Dict[str, Any]:
        return {}

    def _arrays(self) -> Dict[str, np.ndarray]:
        raise NotImplementedError("Subclasses must implement this method.")

    def _restore(self, arrays: Dict[str, np.ndarray]) -> None:
        raise NotImplementedError("Subclasses must implement this method.")


__all__ = ["BasePredictor", "ProgressHook"]
