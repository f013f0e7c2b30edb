"""PMF and BiasedMF baselines on the shared SGD trainer."""

from __future__ import annotations

from typing import Any, Dict, Optional, Tuple

import numpy as np

from qos_prediction.models import (
    BiasVectors,
    FactorGradients,
    FiemfParams,
    MFHyperparams,
    NeighborTable,
    QosMatrix,
    RegionModel,
    TrainingTrace,
)

from .base import BasePredictor, ProgressHook
from .sgd import (
    FactorTerms,
    factor_gradient,
    factor_objective,
    predict_entries,
    train_factor_model,
)


def _biasedmf_offsets(train: QosMatrix, hyper: MFHyperparams) -> Optional[np.ndarray]:
    if not hyper.use_global_offset:
        return None
    return np.full(train.num_users, train.global_mean, dtype=np.float64)


def pmf_train(
    train: QosMatrix,
    config: Optional[MFHyperparams] = None,
    *,
    progress_hook: ProgressHook | None = None,
) -> Tuple[FiemfParams, TrainingTrace]:
    config = config or MFHyperparams()
    return train_factor_model(
        train,
        FactorTerms.pmf(config.lam),
        config,
        progress_hook=progress_hook,
        label="pmf",
    )


def biasedmf_train(
    train: QosMatrix,
    config: Optional[MFHyperparams] = None,
    *,
    progress_hook: ProgressHook | None = None,
) -> Tuple[FiemfParams, TrainingTrace]:
    config = config or MFHyperparams()
    return train_factor_model(
        train,
        FactorTerms.biasedmf(config.lam),
        config,
        offsets=_biasedmf_offsets(train, config),
        progress_hook=progress_hook,
        label="biasedmf",
    )


def pmf_objective(train: QosMatrix, params: FiemfParams, lam: float) -> float:
    return factor_objective(train, params, FactorTerms.pmf(lam))


def pmf_gradient(train: QosMatrix, params: FiemfParams, lam: float) -> FactorGradients:
    return factor_gradient(train, params, FactorTerms.pmf(lam))


def biasedmf_objective(train: QosMatrix, params: FiemfParams, lam: float) -> float:
    return factor_objective(train, params, FactorTerms.biasedmf(lam))


def biasedmf_gradient(train: QosMatrix, params: FiemfParams, lam: float) -> FactorGradients:
    return factor_gradient(train, params, FactorTerms.biasedmf(lam))


class _FactorPredictor(BasePredictor):
    def __init__(self, hyper: Optional[MFHyperparams] = None, *, clamp: bool = True) -> None:
        super().__init__(clamp=clamp)
        self.hyper = hyper or MFHyperparams()
        self.params: Optional[FiemfParams] = None

    def hyperparameters(self) -> Dict[str, Any]:
        return self.hyper.to_dict()

    def _terms(self) -> FactorTerms:
        raise NotImplementedError("Subclasses must implement this method.")

    def predict_raw(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        return predict_entries(users, services, self.params, self._terms())

    def _arrays(self) -> Dict[str, np.ndarray]:
        return {
            "U": self.params.U,
            "S": self.params.S,
            "b": self.params.biases.b,
            "p": self.params.biases.p,
            "mu": self.params.mu,
        }

    def _restore(self, arrays: Dict[str, np.ndarray]) -> None:
        self.params = FiemfParams(
            U=np.array(arrays["U"], dtype=np.float64),
            S=np.array(arrays["S"], dtype=np.float64),
            biases=BiasVectors(
                b=np.array(arrays["b"], dtype=np.float64),
                p=np.array(arrays["p"], dtype=np.float64),
            ),
            mu=np.array(arrays["mu"], dtype=np.float64),
        )


class PmfPredictor(_FactorPredictor):
    name = "pmf"

    def _terms(self) -> FactorTerms:
        return FactorTerms.pmf(self.hyper.lam)

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self.params, self.trace = pmf_train(train, self.hyper, progress_hook=progress_hook)


class BiasedMfPredictor(_FactorPredictor):
    name = "biasedmf"

    def _terms(self) -> FactorTerms:
        return FactorTerms.biasedmf(self.hyper.lam)

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self.params, self.trace = biasedmf_train(train, self.hyper, progress_hook=progress_hook)


__all__ = [
    "BiasedMfPredictor",
    "PmfPredictor",
    "biasedmf_gradient",
    "biasedmf_objective",
    "biasedmf_train",
    "pmf_gradient",
    "pmf_objective",
    "pmf_train",
]
