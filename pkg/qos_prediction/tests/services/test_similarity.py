from __future__ import annotations

import math
import statistics
from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest

from qos_prediction.models import QosMatrix, SimilarityDiagnostics, SimilarityOptions
from qos_prediction.services import similarity as similarity_module
from qos_prediction.services.similarity import (
    build_neighbor_table,
    entropy_profile,
    export_neighbors,
    fie_similarity,
    fuzzy_entropy,
    fuzzy_joint_entropy,
    fuzzy_mutual_information,
    load_neighbors,
    relationship_matrix,
    relationship_value,
    similarity_matrix,
    top_k_neighbors,
)


def _cells(ratings: List[float], r_med: float) -> List[List[float]]:
    return [
        [math.exp(-0.5 * abs(x - y)) if abs(x - y) < r_med else 0.0 for y in ratings]
        for x in ratings
    ]


def _entropy(cells: List[List[float]]) -> float:
    n = len(cells)
    return -sum(math.log(sum(row) / n) for row in cells) / n


def _oracle(
    ratings_a: Dict[int, float],
    ratings_b: Dict[int, float],
    options: SimilarityOptions,
    global_median: float,
) -> float:
    co_rated = sorted(set(ratings_a) & set(ratings_b))
    if len(co_rated) < options.min_corated:
        return 0.0
    xs = [ratings_a[s] for s in co_rated]
    ys = [ratings_b[s] for s in co_rated]
    if options.r_med_mode == "global":
        med_a = med_b = global_median
    else:
        med_a, med_b = statistics.median(xs), statistics.median(ys)
    cells_a, cells_b = _cells(xs, med_a), _cells(ys, med_b)
    h_a, h_b = _entropy(cells_a), _entropy(cells_b)
    joint = [[min(p, q) for p, q in zip(ra, rb)] for ra, rb in zip(cells_a, cells_b)]
    h_ab = _entropy(joint)
    if h_a + h_b == 0.0:
        return 1.0
    value = 2.0 * (h_a + h_b - h_ab) * math.exp(-abs(h_a - h_b)) / (h_a + h_b)
    return min(max(value, 0.0), 1.0)


def _random_matrix(rng: np.random.Generator) -> QosMatrix:
    num_users = int(rng.integers(2, 9))
    num_services = int(rng.integers(2, 11))
    mask = rng.random((num_users, num_services)) < rng.uniform(0.3, 1.0)
    if rng.random() < 0.5:
        values = rng.choice([0.2, 0.5, 1.0, 1.5, 3.0], size=mask.shape)
    else:
        values = rng.uniform(0.01, 5.0, size=mask.shape)
    users, services = np.nonzero(mask)
    if users.size == 0:
        users, services = np.array([0]), np.array([0])
    return QosMatrix.from_triplets(
        num_users, num_services, users, services, values[users, services]
    )


@pytest.mark.parametrize("r_med_mode", ["user", "global"])
def test_similarity_matches_brute_force(r_med_mode: str) -> None:
    rng = np.random.default_rng(2024 if r_med_mode == "user" else 2025)
    options = SimilarityOptions(r_med_mode=r_med_mode)
    checked = 0
    for _ in range(120):
        train = _random_matrix(rng)
        matrix = similarity_matrix(train, options).matrix
        for a in range(train.num_users):
            for b in range(train.num_users):
                if a == b:
                    continue
                expected = _oracle(
                    train.user_ratings(a), train.user_ratings(b), options, train.median
                )
                assert fie_similarity(a, b, train, options) == pytest.approx(expected, abs=1e-12)
                assert matrix[a, b] == pytest.approx(expected, abs=1e-12)
                checked += 1
    assert checked >= 100


def test_relationship_value_documented_examples() -> None:
    assert relationship_value(1.0, 1.4, 1.0) == pytest.approx(0.818731, abs=1e-6)
    assert relationship_value(1.2, 1.0, 1.0) == pytest.approx(0.904837, abs=1e-6)
    assert relationship_value(2.0, 2.0, 0.5) == 1.0
    # the threshold is strict
    assert relationship_value(1.0, 2.0, 1.0) == 0.0
    assert relationship_value(1.0, 3.0, 1.0) == 0.0


def test_relationship_value_rejects_non_positive_threshold() -> None:
    with pytest.raises(ValueError):
        relationship_value(1.0, 1.0, 0.0)


def test_relationship_matrix_is_symmetric_with_unit_diagonal() -> None:
    matrix = relationship_matrix({3: 0.4, 1: 1.1, 7: 0.9}, r_med=0.9)

    assert matrix.index_set == (1, 3, 7)
    assert np.array_equal(matrix.cells, matrix.cells.T)
    assert np.all(np.diag(matrix.cells) == 1.0)
    assert np.all((matrix.cells >= 0.0) & (matrix.cells <= 1.0))


def test_relationship_matrix_requires_ratings_for_index_set() -> None:
    with pytest.raises(ValueError):
        relationship_matrix({0: 1.0}, r_med=1.0, index_set=[0, 1])


def test_entropy_examples() -> None:
    spread = relationship_matrix({0: 1.0, 1: 5.0, 2: 9.0}, r_med=1.0)
    flat = relationship_matrix({0: 2.0, 1: 2.0, 2: 2.0}, r_med=1.0)

    assert fuzzy_entropy(spread) == pytest.approx(math.log(3))
    assert fuzzy_entropy(flat) == 0.0


def test_entropy_bounds_hold_on_random_pairs() -> None:
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        index = list(range(n))
        ratings_a = dict(zip(index, rng.uniform(0.05, 4.0, n)))
        ratings_b = dict(zip(index, rng.uniform(0.05, 4.0, n)))
        ma = relationship_matrix(ratings_a, float(rng.uniform(0.1, 3.0)))
        mb = relationship_matrix(ratings_b, float(rng.uniform(0.1, 3.0)))
        h_a, h_b = fuzzy_entropy(ma), fuzzy_entropy(mb)
        h_ab = fuzzy_joint_entropy(ma, mb)

        assert -1e-12 <= h_a <= math.log(n) + 1e-12
        assert h_ab >= max(h_a, h_b) - 1e-12
        assert fuzzy_mutual_information(ma, mb) <= min(h_a, h_b) + 1e-12


def test_joint_entropy_requires_aligned_index_sets() -> None:
    ma = relationship_matrix({0: 1.0, 1: 2.0}, r_med=1.0)
    mb = relationship_matrix({0: 1.0, 2: 2.0}, r_med=1.0)
    with pytest.raises(ValueError):
        fuzzy_joint_entropy(ma, mb)


def test_similarity_is_symmetric_and_bounded(toy_matrix: QosMatrix) -> None:
    result = similarity_matrix(toy_matrix)
    matrix = result.matrix

    assert np.array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0.0)
    assert np.all((matrix >= 0.0) & (matrix <= 1.0))
    assert result.diagnostics.pairs_evaluated == 8 * 7 // 2


def test_parallel_rows_match_serial(toy_matrix: QosMatrix) -> None:
    serial = similarity_matrix(toy_matrix, max_workers=1).matrix
    parallel = similarity_matrix(toy_matrix, max_workers=3).matrix
    assert np.array_equal(serial, parallel)


def test_pairs_below_min_corated_score_zero() -> None:
    train = QosMatrix.from_triplets(
        3, 4, [0, 0, 1, 1, 2, 2], [0, 1, 0, 2, 2, 3], [1.0, 2.0, 1.5, 0.5, 0.7, 0.8]
    )
    diagnostics = SimilarityDiagnostics()
    assert fie_similarity(0, 1, train, diagnostics=diagnostics) == 0.0
    assert diagnostics.pairs_below_threshold == 1


def test_identical_flat_users_score_one() -> None:
    train = QosMatrix.from_triplets(2, 3, [0, 0, 0, 1, 1, 1], [0, 1, 2] * 2, [0.5] * 6)
    assert fie_similarity(0, 1, train) == 1.0


def test_self_similarity_is_rejected(toy_matrix: QosMatrix) -> None:
    with pytest.raises(ValueError):
        fie_similarity(2, 2, toy_matrix)


def test_pair_cap_subsamples_deterministically() -> None:
    rng = np.random.default_rng(9)
    services = np.arange(30)
    train = QosMatrix.from_triplets(
        2,
        30,
        np.repeat([0, 1], 30),
        np.concatenate([services, services]),
        rng.uniform(0.1, 3.0, 60),
    )
    options = SimilarityOptions(pair_cap=10, cap_seed=3)
    diagnostics = SimilarityDiagnostics()

    forward = fie_similarity(0, 1, train, options, diagnostics)
    backward = fie_similarity(1, 0, train, options)

    assert forward == backward
    assert diagnostics.pairs_capped == 1
    assert forward != fie_similarity(0, 1, train, SimilarityOptions(pair_cap=10, cap_seed=4))


def test_top_k_weights_documented_example() -> None:
    train = QosMatrix.from_triplets(3, 1, [0, 1, 2], [0, 0, 0], [1.0, 1.0, 1.0])
    neighbors = top_k_neighbors(0, 2, train, similarities=np.array([0.0, 0.8, 0.4]))

    assert neighbors.ids == [1, 2]
    assert np.allclose(neighbors.weights, [2 / 3, 1 / 3])


def test_top_k_breaks_ties_by_user_id_and_skips_zero() -> None:
    train = QosMatrix.from_triplets(5, 1, [0, 1, 2, 3, 4], [0] * 5, [1.0] * 5)
    neighbors = top_k_neighbors(0, 2, train, similarities=np.array([0.0, 0.5, 0.0, 0.5, 0.5]))

    assert neighbors.ids == [1, 3]
    assert np.allclose(neighbors.weights, [0.5, 0.5])


def test_top_k_without_positive_similarity_is_empty() -> None:
    train = QosMatrix.from_triplets(3, 1, [0, 1, 2], [0, 0, 0], [1.0, 1.0, 1.0])
    neighbors = top_k_neighbors(1, 3, train, similarities=np.zeros(3))
    assert len(neighbors) == 0


def test_top_k_computes_similarities_when_missing(toy_matrix: QosMatrix) -> None:
    matrix = similarity_matrix(toy_matrix).matrix
    computed = top_k_neighbors(4, 3, toy_matrix)
    precomputed = top_k_neighbors(4, 3, toy_matrix, similarities=matrix[4])
    assert computed == precomputed


def test_top_k_rejects_invalid_k(toy_matrix: QosMatrix) -> None:
    with pytest.raises(ValueError):
        top_k_neighbors(0, 0, toy_matrix)


def test_neighbor_table_weights_sum_to_one(toy_matrix: QosMatrix) -> None:
    table = build_neighbor_table(similarity_matrix(toy_matrix).matrix, k=3)

    assert table.num_users == toy_matrix.num_users
    for neighbor_set in table.sets:
        assert len(neighbor_set) <= 3
        assert neighbor_set.user_id not in neighbor_set.ids
        if len(neighbor_set):
            assert neighbor_set.weights.sum() == pytest.approx(1.0)
            assert np.all(neighbor_set.weights > 0)


def test_neighbor_export_round_trip(tmp_path: Path, toy_matrix: QosMatrix) -> None:
    table = build_neighbor_table(similarity_matrix(toy_matrix).matrix, k=2)
    path = export_neighbors(table, tmp_path / "neighbors.csv")
    restored = load_neighbors(path, toy_matrix.num_users)

    assert restored.to_records() == table.to_records()


def test_entropy_profile_matches_relationship_matrix(
    monkeypatch: pytest.MonkeyPatch, toy_matrix: QosMatrix
) -> None:
    monkeypatch.setattr(similarity_module, "_ENTROPY_BLOCK_ROWS", 3)
    ratings = toy_matrix.user_ratings(5)
    expected = fuzzy_entropy(relationship_matrix(ratings, statistics.median(ratings.values())))

    profile = entropy_profile(5, toy_matrix)

    assert profile.num_services == len(ratings)
    assert profile.fie == pytest.approx(expected, abs=1e-12)


def test_entropy_profile_of_user_without_entries() -> None:
    train = QosMatrix.from_triplets(2, 2, [0, 0], [0, 1], [1.0, 2.0])
    profile = entropy_profile(1, train)
    assert profile.fie == 0.0
    assert profile.num_services == 0
