"""FIEMF: region-biased matrix factorization with a fuzzy-entropy neighborhood regularizer.

    q_hat(i, j) = alpha * <U_i, S_j> + (1 - alpha) * (mu_i + b_i + p_j)

``mu_i`` is the region mean of user ``i`` and stays frozen during training.
``lam`` and ``gamma`` enter the objective and every update multiplied by
``penalty_scale``; at 1.0 they apply per visited entry as written.
The neighborhood term pulls ``U_i`` toward the weighted mean of its Top-K
fuzzy-entropy neighbors.
"""

from __future__ import annotations

from typing import Any, Dict, Optional, Tuple

import numpy as np

from qos_prediction.models import (
    EntryGradients,
    FactorGradients,
    FiemfHyperparams,
    FiemfParams,
    NeighborTable,
    QosMatrix,
    RegionModel,
    TrainingTrace,
)

from .base import ProgressHook
from .mf import _FactorPredictor
from .sgd import (
    FactorTerms,
    entry_gradients,
    factor_gradient,
    factor_objective,
    train_factor_model,
)


def _terms(hyper: FiemfHyperparams) -> FactorTerms:
    scale = hyper.penalty_scale
    return FactorTerms.fiemf(hyper.alpha, hyper.lam * scale, hyper.gamma * scale)


def predict(i: int, j: int, params: FiemfParams, mu_i: float, alpha: float) -> float:
    if not 0 <= i < params.num_users:
        raise ValueError(f"user {i} out of range")
    if not 0 <= j < params.num_services:
        raise ValueError(f"service {j} out of range")
    interaction = float(params.U[i] @ params.S[j])
    bias = mu_i + params.biases.b[i] + params.biases.p[j]
    return alpha * interaction + (1.0 - alpha) * float(bias)


def objective(
    train: QosMatrix,
    params: FiemfParams,
    neighbors: NeighborTable,
    hyper: FiemfHyperparams,
    *,
    anchor: Optional[np.ndarray] = None,
) -> float:
    return factor_objective(train, params, _terms(hyper), neighbors.weight_matrix, anchor=anchor)


def objective_gradient(
    train: QosMatrix,
    params: FiemfParams,
    neighbors: NeighborTable,
    hyper: FiemfHyperparams,
    *,
    anchor: Optional[np.ndarray] = None,
) -> FactorGradients:
    """Full-batch gradient matching ``hyper.full_neighbor_gradient``."""
    return factor_gradient(
        train,
        params,
        _terms(hyper),
        neighbors.weight_matrix,
        anchor=anchor,
        full_neighbor_gradient=hyper.full_neighbor_gradient and anchor is None,
    )


def gradients(
    i: int,
    j: int,
    e: float,
    params: FiemfParams,
    neighbors: NeighborTable,
    hyper: FiemfHyperparams,
) -> EntryGradients:
    return entry_gradients(
        i,
        j,
        e,
        params,
        _terms(hyper),
        neighbors,
        full_neighbor_gradient=hyper.full_neighbor_gradient,
    )


def train(
    train_matrix: QosMatrix,
    neighbors: NeighborTable,
    region_model: RegionModel,
    hyper: Optional[FiemfHyperparams] = None,
    *,
    progress_hook: ProgressHook | None = None,
) -> Tuple[FiemfParams, TrainingTrace]:
    hyper = hyper or FiemfHyperparams()
    if region_model.num_users != train_matrix.num_users:
        raise ValueError(
            f"region model covers {region_model.num_users} users, "
            f"train has {train_matrix.num_users}"
        )
    return train_factor_model(
        train_matrix,
        _terms(hyper),
        hyper,
        offsets=region_model.user_means,
        neighbors=neighbors,
        full_neighbor_gradient=hyper.full_neighbor_gradient,
        progress_hook=progress_hook,
        label="fiemf",
    )


class FiemfPredictor(_FactorPredictor):
    name = "fiemf"
    requires_regions = True
    requires_neighbors = True

    def __init__(self, hyper: Optional[FiemfHyperparams] = None, *, clamp: bool = True) -> None:
        super().__init__(clamp=clamp)
        self.hyper = hyper or FiemfHyperparams()

    def hyperparameters(self) -> Dict[str, Any]:
        return self.hyper.to_dict()

    def _terms(self) -> FactorTerms:
        return _terms(self.hyper)

    def _fit(
        self,
        train_matrix: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self.params, self.trace = train(
            train_matrix, neighbors, regions, self.hyper, progress_hook=progress_hook
        )


__all__ = [
    "FiemfPredictor",
    "gradients",
    "objective",
    "objective_gradient",
    "predict",
    "train",
]
