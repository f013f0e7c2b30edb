"""UMEAN and IMEAN: per-user and per-service training means."""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from qos_prediction.models import NeighborTable, QosMatrix, RegionModel

from .base import BasePredictor, ProgressHook


def _means_with_fallback(sums: np.ndarray, counts: np.ndarray, fallback: float) -> np.ndarray:
    means = np.full(sums.shape, fallback, dtype=np.float64)
    observed = counts > 0
    means[observed] = sums[observed] / counts[observed]
    return means


def user_means(train: QosMatrix) -> np.ndarray:
    return _means_with_fallback(train.user_sums, train.user_counts, train.global_mean)


def service_means(train: QosMatrix) -> np.ndarray:
    return _means_with_fallback(train.service_sums, train.service_counts, train.global_mean)


def umean_predict(i: int, j: int, train: QosMatrix) -> float:
    _, values = train.user_entries(i)
    return float(values.mean()) if values.size else train.global_mean


def imean_predict(i: int, j: int, train: QosMatrix) -> float:
    if not 0 <= j < train.num_services:
        raise ValueError(f"service {j} out of range")
    values = train.values[train.services == j]
    return float(values.mean()) if values.size else train.global_mean


class _MeanPredictor(BasePredictor):
    def __init__(self, *, clamp: bool = True) -> None:
        super().__init__(clamp=clamp)
        self.means: Optional[np.ndarray] = None

    def _arrays(self) -> Dict[str, np.ndarray]:
        return {"means": self.means}

    def _restore(self, arrays: Dict[str, np.ndarray]) -> None:
        self.means = np.asarray(arrays["means"], dtype=np.float64)


class UMeanPredictor(_MeanPredictor):
    name = "umean"

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self.means = user_means(train)

    def predict_raw(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        return self.means[users]


class IMeanPredictor(_MeanPredictor):
    name = "imean"

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self.means = service_means(train)

    def predict_raw(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        return self.means[services]


__all__ = [
    "IMeanPredictor",
    "UMeanPredictor",
    "imean_predict",
    "service_means",
    "umean_predict",
    "user_means",
]
