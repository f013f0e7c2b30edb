"""QoS predictors: the FIEMF model and its comparison baselines."""

from .base import BasePredictor, ProgressHook
from .fiemf import FiemfPredictor
from .means import IMeanPredictor, UMeanPredictor, imean_predict, umean_predict
from .mf import BiasedMfPredictor, PmfPredictor
from .registry import PREDICTOR_FACTORIES, create_predictor
from .uipcc import UipccPredictor, uipcc_predict

__all__ = [
    "BasePredictor",
    "BiasedMfPredictor",
    "FiemfPredictor",
    "IMeanPredictor",
    "PREDICTOR_FACTORIES",
    "PmfPredictor",
    "ProgressHook",
    "UMeanPredictor",
    "UipccPredictor",
    "create_predictor",
    "imean_predict",
    "uipcc_predict",
    "umean_predict",
]
