"""Build predictors by method tag from Settings."""

from __future__ import annotations

from typing import Callable, Dict

from qos_prediction.config import METHODS, Settings

from .base import BasePredictor
from .fiemf import FiemfPredictor
from .means import IMeanPredictor, UMeanPredictor
from .mf import BiasedMfPredictor, PmfPredictor
from .uipcc import UipccPredictor

PredictorFactory = Callable[[Settings], BasePredictor]

PREDICTOR_FACTORIES: Dict[str, PredictorFactory] = {
    "umean": lambda settings: UMeanPredictor(clamp=settings.clamp_predictions),
    "imean": lambda settings: IMeanPredictor(clamp=settings.clamp_predictions),
    "uipcc": lambda settings: UipccPredictor(settings.uipcc, clamp=settings.clamp_predictions),
    "pmf": lambda settings: PmfPredictor(settings.pmf, clamp=settings.clamp_predictions),
    "biasedmf": lambda settings: BiasedMfPredictor(
        settings.biasedmf, clamp=settings.clamp_predictions
    ),
    "fiemf": lambda settings: FiemfPredictor(settings.fiemf, clamp=settings.clamp_predictions),
}


def create_predictor(method: str, settings: Settings) -> BasePredictor:
    key = method.strip().lower()
    try:
        factory = PREDICTOR_FACTORIES[key]
    except KeyError:
        raise ValueError(
            f"unknown method {method!r}; expected one of {', '.join(METHODS)}"
        ) from None
    return factory(settings)


__all__ = ["PREDICTOR_FACTORIES", "create_predictor"]
