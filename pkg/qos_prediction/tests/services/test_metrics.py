from __future__ import annotations

import math

import numpy as np
import pytest

from qos_prediction.services.metrics import mae, mae_arrays, rmse, rmse_arrays


def test_documented_example() -> None:
    pairs = [(1.0, 2.0), (3.0, 1.0)]
    assert mae(pairs) == pytest.approx(1.5)
    assert rmse(pairs) == pytest.approx(math.sqrt(2.5))


def test_perfect_predictions_score_zero() -> None:
    pairs = [(0.3, 0.3), (1.7, 1.7)]
    assert mae(pairs) == 0.0
    assert rmse(pairs) == 0.0


def test_mae_never_exceeds_rmse() -> None:
    rng = np.random.default_rng(3)
    for _ in range(50):
        size = int(rng.integers(1, 40))
        truth = rng.uniform(0.0, 20.0, size)
        predictions = rng.uniform(0.0, 20.0, size)
        assert mae_arrays(truth, predictions) <= rmse_arrays(truth, predictions) + 1e-12


def test_pair_and_array_forms_agree() -> None:
    truth = np.array([0.5, 1.0, 4.0])
    predictions = np.array([0.7, 0.9, 2.5])
    pairs = list(zip(truth, predictions))
    assert mae(pairs) == pytest.approx(mae_arrays(truth, predictions))
    assert rmse(pairs) == pytest.approx(rmse_arrays(truth, predictions))


def test_empty_input_raises() -> None:
    with pytest.raises(ValueError):
        mae([])
    with pytest.raises(ValueError):
        rmse_arrays(np.array([]), np.array([]))


def test_shape_mismatch_raises() -> None:
    with pytest.raises(ValueError):
        mae_arrays(np.array([1.0, 2.0]), np.array([1.0]))
