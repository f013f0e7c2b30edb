from __future__ import annotations

import numpy as np
import pytest

from qos_prediction.config import Settings
from qos_prediction.models import (
    BiasVectors,
    FiemfHyperparams,
    FiemfParams,
    NeighborTable,
    QosMatrix,
    UserRegionTable,
)
from qos_prediction.predictors import FiemfPredictor, create_predictor, fiemf
from qos_prediction.services.dataset import split
from qos_prediction.services.metrics import mae_arrays
from qos_prediction.services.region import build_region_model
from qos_prediction.services.similarity import build_neighbor_table, similarity_matrix

SMALL = {"dim": 3, "max_iters": 20, "learning_rate": 0.02, "lam": 0.1, "gamma": 0.5}


def _params() -> FiemfParams:
    return FiemfParams(
        U=np.array([[1.0, 2.0], [0.5, -1.0]]),
        S=np.array([[0.2, 0.1], [1.0, 1.0], [-0.5, 0.3]]),
        biases=BiasVectors(b=np.array([0.1, -0.2]), p=np.array([0.05, 0.0, 0.3])),
        mu=np.array([1.2, 0.8]),
    )


def test_predict_formula() -> None:
    params = _params()
    # interaction 1*1 + 2*1 = 3, bias 1.2 + 0.1 + 0.0
    assert fiemf.predict(0, 1, params, 1.2, 0.25) == pytest.approx(0.25 * 3.0 + 0.75 * 1.3)


def test_alpha_zero_is_pure_bias_and_alpha_one_pure_interaction() -> None:
    params = _params()
    assert fiemf.predict(1, 2, params, 0.8, 0.0) == pytest.approx(0.8 - 0.2 + 0.3)
    assert fiemf.predict(1, 2, params, 0.8, 1.0) == pytest.approx(-0.25 - 0.3)


def test_predict_rejects_out_of_range_indices() -> None:
    with pytest.raises(ValueError):
        fiemf.predict(2, 0, _params(), 1.0, 0.5)
    with pytest.raises(ValueError):
        fiemf.predict(0, 3, _params(), 1.0, 0.5)


def _inputs(matrix: QosMatrix, regions: UserRegionTable):
    neighbors = build_neighbor_table(similarity_matrix(matrix).matrix, k=3)
    return neighbors, build_region_model(matrix, regions)


def test_training_reduces_objective(toy_matrix: QosMatrix, toy_regions: UserRegionTable) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    hyper = FiemfHyperparams(alpha=0.5, **SMALL)

    params, trace = fiemf.train(toy_matrix, neighbors, regions, hyper)

    assert trace.epochs == 20
    assert trace.losses[-1] < trace.initial_loss
    assert trace.losses[-1] == pytest.approx(fiemf.objective(toy_matrix, params, neighbors, hyper))
    assert np.array_equal(params.mu, regions.user_means)


def test_full_neighbor_gradient_mode_trains(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    hyper = FiemfHyperparams(alpha=0.5, full_neighbor_gradient=True, **SMALL)

    params, trace = fiemf.train(toy_matrix, neighbors, regions, hyper)

    assert params.is_finite()
    assert trace.losses[-1] < trace.initial_loss


def test_alpha_zero_predictor_ignores_factors(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    predictor = FiemfPredictor(FiemfHyperparams(alpha=0.0, **SMALL), clamp=False)
    predictor.fit(toy_matrix, regions=regions, neighbors=neighbors)
    params = predictor.params

    for i, j in [(0, 0), (3, 7), (7, 9)]:
        expected = regions.mu(i) + params.biases.b[i] + params.biases.p[j]
        assert predictor.predict_one(i, j) == pytest.approx(expected)


def test_predictor_matches_module_predict(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    hyper = FiemfHyperparams(alpha=0.3, **SMALL)
    predictor = FiemfPredictor(hyper, clamp=False).fit(
        toy_matrix, regions=regions, neighbors=neighbors
    )

    for i, j in [(0, 1), (5, 4), (6, 8)]:
        expected = fiemf.predict(i, j, predictor.params, regions.mu(i), 0.3)
        assert predictor.predict_one(i, j) == pytest.approx(expected)


def test_predictor_requires_neighbors_and_regions(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    with pytest.raises(ValueError):
        FiemfPredictor().fit(toy_matrix, regions=regions)
    with pytest.raises(ValueError):
        FiemfPredictor().fit(toy_matrix, neighbors=neighbors)


def test_train_rejects_mismatched_inputs(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    neighbors, regions = _inputs(toy_matrix, toy_regions)
    with pytest.raises(ValueError):
        fiemf.train(toy_matrix, NeighborTable.empty(3), regions, FiemfHyperparams(**SMALL))
    smaller = QosMatrix.from_triplets(4, 10, [0, 1, 2, 3], [0, 1, 2, 3], [1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        fiemf.train(smaller, neighbors, regions, FiemfHyperparams(**SMALL))


def test_empty_neighbor_sets_are_allowed(
    toy_matrix: QosMatrix, toy_regions: UserRegionTable
) -> None:
    _, regions = _inputs(toy_matrix, toy_regions)
    empty = NeighborTable.empty(toy_matrix.num_users)

    params, _ = fiemf.train(toy_matrix, empty, regions, FiemfHyperparams(**SMALL))

    assert params.is_finite()


def test_registry_builds_configured_predictors() -> None:
    settings = Settings(fiemf={"alpha": 0.4}, clamp_predictions=False)
    predictor = create_predictor(" FIEMF ", settings)

    assert isinstance(predictor, FiemfPredictor)
    assert predictor.hyper.alpha == 0.4
    assert predictor.clamp is False
    with pytest.raises(ValueError):
        create_predictor("svd", settings)


@pytest.fixture(scope="module")
def structured_split():
    """60 x 200 response times: region shift + service cost + a rank-2 interaction."""
    rng = np.random.default_rng(11)
    num_users, num_services = 60, 200
    region_of = rng.integers(0, 6, size=num_users)
    shift = rng.uniform(0.2, 1.2, size=6)[region_of]
    cost = rng.uniform(0.0, 1.0, size=num_services)
    interaction = rng.normal(0.0, 0.8, (num_users, 2)) @ rng.normal(0.0, 0.8, (2, num_services))
    values = 2.0 + shift[:, None] + cost[None, :] + interaction
    values += rng.normal(0.0, 0.05, values.shape)
    users, services = np.indices(values.shape)
    matrix = QosMatrix.from_triplets(
        num_users,
        num_services,
        users.ravel(),
        services.ravel(),
        np.clip(values, 0.05, None).ravel(),
    )
    table = UserRegionTable.from_mapping(
        {user: f"R{region}" for user, region in enumerate(region_of)}
    )
    return split(matrix, 0.5, seed=1), table


def _fit_default(structured_split, **overrides) -> tuple[FiemfPredictor, float]:
    data_split, table = structured_split
    train = data_split.train
    predictor = FiemfPredictor(FiemfHyperparams(**overrides)).fit(
        train,
        regions=build_region_model(train, table),
        neighbors=build_neighbor_table(similarity_matrix(train).matrix, k=10),
    )
    test = data_split.test
    return predictor, mae_arrays(test.values, predictor.predict(test.users, test.services))


def test_default_factors_stay_active(structured_split) -> None:
    predictor, _ = _fit_default(structured_split)

    assert np.abs(predictor.params.U).max() > 1e-2
    assert np.abs(predictor.params.S).max() > 1e-2


def test_default_gamma_and_dim_change_test_mae(structured_split) -> None:
    _, default_mae = _fit_default(structured_split)
    _, no_neighborhood = _fit_default(structured_split, gamma=0.0)
    _, narrow = _fit_default(structured_split, dim=2)

    assert abs(default_mae - no_neighborhood) > 1e-4
    assert abs(default_mae - narrow) > 1e-4
