"""Accuracy metrics over (truth, prediction) pairs."""

from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np


def _as_arrays(pairs: Iterable[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    data = np.asarray(list(pairs), dtype=np.float64)
    if data.size == 0:
        raise ValueError("metrics need at least one (truth, prediction) pair")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("pairs must be (truth, prediction) tuples")
    return data[:, 0], data[:, 1]


def _check(truth: np.ndarray, predictions: np.ndarray) -> None:
    if truth.size == 0:
        raise ValueError("metrics need at least one (truth, prediction) pair")
    if truth.shape != predictions.shape:
        raise ValueError("truth and predictions must have the same shape")


def mae_arrays(truth: np.ndarray, predictions: np.ndarray) -> float:
    truth, predictions = np.asarray(truth, np.float64), np.asarray(predictions, np.float64)
    _check(truth, predictions)
    return float(np.mean(np.abs(truth - predictions)))


def rmse_arrays(truth: np.ndarray, predictions: np.ndarray) -> float:
    truth, predictions = np.asarray(truth, np.float64), np.asarray(predictions, np.float64)
    _check(truth, predictions)
    return float(np.sqrt(np.mean((truth - predictions) ** 2)))


def mae(pairs: Iterable[Tuple[float, float]]) -> float:
    return mae_arrays(*_as_arrays(pairs))


def rmse(pairs: Iterable[Tuple[float, float]]) -> float:
    return rmse_arrays(*_as_arrays(pairs))


__all__ = ["mae", "mae_arrays", "rmse", "rmse_arrays"]
