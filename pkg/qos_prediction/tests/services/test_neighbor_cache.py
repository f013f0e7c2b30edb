from __future__ import annotations

from pathlib import Path

import numpy as np

from qos_prediction.config import Settings
from qos_prediction.models import NeighborCacheKey, QosMatrix
from qos_prediction.services.cache import (
    cache_neighbor_table,
    cache_similarity,
    get_cached_neighbors,
    get_cached_similarity,
    invalidate_neighbors,
    load_neighbor_index,
)
from qos_prediction.services.similarity import build_neighbor_table, similarity_matrix


def _make_settings(tmp_path: Path) -> Settings:
    return Settings(
        data_root=tmp_path / "data",
        cache_root=tmp_path / "cache",
        output_dir=tmp_path / "results",
    )


def _key(neighbors: int = 3) -> NeighborCacheKey:
    return NeighborCacheKey(
        fingerprint="abc123",
        density=0.05,
        seed=1,
        r_med_mode="user",
        pair_cap=1000,
        min_corated=2,
        neighbors=neighbors,
    )


def test_neighbor_table_round_trip(tmp_path: Path, toy_matrix: QosMatrix) -> None:
    settings = _make_settings(tmp_path)
    table = build_neighbor_table(similarity_matrix(toy_matrix).matrix, k=3)

    assert get_cached_neighbors(settings, _key()) is None
    cache_neighbor_table(settings, _key(), table)
    restored = get_cached_neighbors(settings, _key())

    assert restored is not None
    assert restored.to_records() == table.to_records()
    assert get_cached_neighbors(settings, _key(neighbors=4)) is None

    index = load_neighbor_index(settings)
    try:
        assert index.count() == 1
    finally:
        index.close()


def test_invalidate_neighbors(tmp_path: Path, toy_matrix: QosMatrix) -> None:
    settings = _make_settings(tmp_path)
    table = build_neighbor_table(similarity_matrix(toy_matrix).matrix, k=2)
    cache_neighbor_table(settings, _key(), table)
    cache_neighbor_table(settings, _key(neighbors=4), table)

    assert invalidate_neighbors(settings, _key()) is True
    assert invalidate_neighbors(settings, _key()) is False
    assert get_cached_neighbors(settings, _key()) is None
    index = load_neighbor_index(settings)
    try:
        assert index.count() == 1
    finally:
        index.close()


def test_similarity_cache_is_shared_across_k(tmp_path: Path) -> None:
    settings = _make_settings(tmp_path)
    matrix = np.array([[0.0, 0.25], [0.25, 0.0]])

    assert get_cached_similarity(settings, _key()) is None
    path = cache_similarity(settings, _key(neighbors=3), matrix)

    assert path.exists()
    assert np.array_equal(get_cached_similarity(settings, _key(neighbors=10)), matrix)


def test_key_slug_tracks_every_option() -> None:
    base = _key()
    assert base.slug != _key(neighbors=5).slug
    assert base.similarity_slug == _key(neighbors=5).similarity_slug
    capped = NeighborCacheKey(**{**base.to_dict(), "pair_cap": 10})
    reseeded = NeighborCacheKey(**{**base.to_dict(), "cap_seed": 7})
    assert capped.similarity_slug != base.similarity_slug
    assert reseeded.similarity_slug != base.similarity_slug
