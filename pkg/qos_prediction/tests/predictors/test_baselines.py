from __future__ import annotations

import math

import numpy as np
import pytest

from qos_prediction.models import QosMatrix, UipccHyperparams
from qos_prediction.predictors import (
    IMeanPredictor,
    UipccPredictor,
    UMeanPredictor,
    imean_predict,
    uipcc_predict,
    umean_predict,
)
from qos_prediction.predictors.uipcc import pcc_similarity


@pytest.fixture
def sparse_train() -> QosMatrix:
    # user 2 and service 3 have no training entries
    return QosMatrix.from_triplets(
        3, 4, [0, 0, 1, 1, 1], [0, 1, 0, 1, 2], [1.0, 3.0, 2.0, 4.0, 6.0]
    )


def test_umean_values_and_fallback(sparse_train: QosMatrix) -> None:
    assert umean_predict(0, 3, sparse_train) == pytest.approx(2.0)
    assert umean_predict(1, 0, sparse_train) == pytest.approx(4.0)
    assert umean_predict(2, 0, sparse_train) == pytest.approx(sparse_train.global_mean)


def test_imean_values_and_fallback(sparse_train: QosMatrix) -> None:
    assert imean_predict(2, 0, sparse_train) == pytest.approx(1.5)
    assert imean_predict(0, 2, sparse_train) == pytest.approx(6.0)
    assert imean_predict(0, 3, sparse_train) == pytest.approx(sparse_train.global_mean)
    with pytest.raises(ValueError):
        imean_predict(0, 4, sparse_train)


def test_mean_predictors_match_functions(sparse_train: QosMatrix) -> None:
    users = np.array([0, 1, 2, 2])
    services = np.array([3, 2, 0, 3])
    umean = UMeanPredictor(clamp=False).fit(sparse_train)
    imean = IMeanPredictor(clamp=False).fit(sparse_train)

    expected_u = [umean_predict(i, j, sparse_train) for i, j in zip(users, services)]
    expected_i = [imean_predict(i, j, sparse_train) for i, j in zip(users, services)]

    assert np.allclose(umean.predict(users, services), expected_u)
    assert np.allclose(imean.predict(users, services), expected_i)


def test_clamping_to_training_range(sparse_train: QosMatrix) -> None:
    predictor = UMeanPredictor().fit(sparse_train)
    predictor.means = np.array([-5.0, 2.5, 100.0])

    predictions = predictor.predict(np.array([0, 1, 2]), np.array([0, 0, 0]))

    assert predictions.tolist() == [1.0, 2.5, 6.0]
    assert predictor.last_clamp_count == 2

    predictor.clamp = False
    assert predictor.predict(np.array([2]), np.array([0]))[0] == 100.0
    assert predictor.last_clamp_count == 0


def test_predict_rejects_out_of_range_indices(sparse_train: QosMatrix) -> None:
    predictor = UMeanPredictor().fit(sparse_train)
    with pytest.raises(ValueError):
        predictor.predict(np.array([3]), np.array([0]))
    with pytest.raises(ValueError):
        predictor.predict_one(0, 4)
    with pytest.raises(ValueError):
        UMeanPredictor().predict(np.array([0]), np.array([0]))


def test_uipcc_identical_users_example() -> None:
    train = QosMatrix.from_triplets(
        2, 4, [0, 0, 0, 1, 1, 1, 1], [0, 1, 2, 0, 1, 2, 3], [1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 2.0]
    )
    config = UipccHyperparams(blend=1.0)
    assert uipcc_predict(0, 3, train, config) == pytest.approx(2.0)


def test_uipcc_falls_back_to_means(sparse_train: QosMatrix) -> None:
    predictor = UipccPredictor(UipccHyperparams(blend=0.5), clamp=False).fit(sparse_train)

    # user 2 has no entries and service 3 no raters: nothing but the global mean remains
    assert predictor.predict_one(2, 3) == pytest.approx(sparse_train.global_mean)
    # a user without entries falls back to the service mean
    assert predictor.predict_one(2, 1) == pytest.approx(3.5)


def test_uipcc_prediction_within_range_when_clamped(toy_matrix: QosMatrix) -> None:
    predictor = UipccPredictor(UipccHyperparams(top_k=3)).fit(toy_matrix)
    users = np.repeat(np.arange(toy_matrix.num_users), toy_matrix.num_services)
    services = np.tile(np.arange(toy_matrix.num_services), toy_matrix.num_users)
    predictions = predictor.predict(users, services)
    low, high = toy_matrix.value_range

    assert np.all(np.isfinite(predictions))
    assert np.all((predictions >= low) & (predictions <= high))


def _brute_pcc(
    ratings: np.ndarray, mask: np.ndarray, means: np.ndarray, a: int, b: int
) -> float:
    co = np.flatnonzero(mask[a] & mask[b])
    if co.size < 2:
        return 0.0
    da = ratings[a, co] - means[a]
    db = ratings[b, co] - means[b]
    denominator = math.sqrt(float(np.sum(da**2)) * float(np.sum(db**2)))
    if denominator == 0.0:
        return 0.0
    weight = 2.0 * co.size / (mask[a].sum() + mask[b].sum())
    return float(np.sum(da * db)) / denominator * weight


def test_pcc_similarity_matches_brute_force() -> None:
    rng = np.random.default_rng(8)
    for _ in range(40):
        rows, cols = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        mask = rng.random((rows, cols)) < 0.7
        ratings = np.where(mask, rng.uniform(0.1, 5.0, (rows, cols)), 0.0)
        counts = np.maximum(mask.sum(axis=1), 1)
        means = ratings.sum(axis=1) / counts

        result = pcc_similarity(ratings, mask, means, block_size=2)

        assert np.all(np.diag(result) == 0.0)
        for a in range(rows):
            for b in range(rows):
                if a != b:
                    assert result[a, b] == pytest.approx(_brute_pcc(ratings, mask, means, a, b))
