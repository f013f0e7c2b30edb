"""Small problems with an exact solution the SGD trainer must reach."""

from __future__ import annotations

import numpy as np
import pytest

from qos_prediction.models import (
    FiemfHyperparams,
    MFHyperparams,
    NeighborTable,
    QosMatrix,
    UserRegionTable,
)
from qos_prediction.predictors import fiemf
from qos_prediction.predictors.mf import biasedmf_train, pmf_train
from qos_prediction.predictors.sgd import FactorTerms, predict_entries
from qos_prediction.services.region import build_region_model

LONG_RUN = {"lr_decay": 1.0, "tolerance": 0.0, "init_seed": 3}


def _complete(values: np.ndarray) -> QosMatrix:
    users, services = np.nonzero(np.ones_like(values, dtype=bool))
    return QosMatrix.from_triplets(
        values.shape[0], values.shape[1], users, services, values[users, services]
    )


def _train_rmse(matrix: QosMatrix, params, terms: FactorTerms) -> float:
    residuals = matrix.values - predict_entries(matrix.users, matrix.services, params, terms)
    return float(np.sqrt(np.mean(residuals**2)))


def test_pmf_recovers_rank_one_matrix() -> None:
    matrix = _complete(np.outer([1.0, 2.0, 3.0], [1.0, 0.5, 2.0]))
    hyper = MFHyperparams(
        dim=1, lam=0.0, learning_rate=0.01, max_iters=3000, init_scale=0.5, **LONG_RUN
    )

    params, _ = pmf_train(matrix, hyper)

    assert _train_rmse(matrix, params, FactorTerms.pmf(0.0)) < 1e-2


def test_biasedmf_absorbs_a_constant_matrix() -> None:
    matrix = _complete(np.full((3, 4), 2.0))
    hyper = MFHyperparams(
        dim=1, lam=0.0, learning_rate=0.02, max_iters=1500, init_scale=0.1, **LONG_RUN
    )

    params, trace = biasedmf_train(matrix, hyper)

    assert _train_rmse(matrix, params, FactorTerms.biasedmf(0.0)) < 1e-2
    assert trace.train_rmse[-1] < trace.initial_rmse


def test_fiemf_interaction_only_fits_a_single_entry() -> None:
    matrix = QosMatrix.from_triplets(1, 1, [0], [0], [2.0])
    regions = build_region_model(matrix, UserRegionTable.from_mapping({0: "Chile"}))
    hyper = FiemfHyperparams(
        alpha=1.0,
        lam=0.0,
        gamma=0.0,
        dim=1,
        learning_rate=0.05,
        max_iters=2000,
        init_scale=0.5,
        **LONG_RUN,
    )

    params, _ = fiemf.train(matrix, NeighborTable.empty(1), regions, hyper)

    assert float(params.U[0] @ params.S[0]) == pytest.approx(2.0, abs=1e-3)


def test_fiemf_bias_only_fits_offsets_from_region_means() -> None:
    matrix = QosMatrix.from_triplets(2, 1, [0, 1], [0, 0], [3.0, 1.0])
    regions = build_region_model(matrix, UserRegionTable.from_mapping({0: "Peru", 1: "Peru"}))
    hyper = FiemfHyperparams(
        alpha=0.0, lam=0.0, gamma=0.0, dim=1, learning_rate=0.05, max_iters=2000, **LONG_RUN
    )

    params, _ = fiemf.train(matrix, NeighborTable.empty(2), regions, hyper)

    # each user's region mean is the other user's value
    assert regions.mu(0) == 1.0
    assert regions.mu(1) == 3.0
    b, p = params.biases.b, params.biases.p
    assert b[0] + p[0] == pytest.approx(3.0 - 1.0, abs=1e-3)
    assert b[1] + p[0] == pytest.approx(1.0 - 3.0, abs=1e-3)
