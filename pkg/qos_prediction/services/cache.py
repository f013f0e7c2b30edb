"""Caching services for neighbor tables and similarity matrices.

Neighbor tables live in ``cache_root/neighbors/index.sqlite`` as JSON
envelopes keyed by :class:`NeighborCacheKey`. The dense similarity matrix
behind them is stored once per split and option set under
``cache_root/similarity/<slug>.npy`` so a different K reuses it.

Writes take a file lock next to the index; reads do not.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from filelock import FileLock

from qos_prediction.config import Settings
from qos_prediction.models import (
    NeighborCacheEntry,
    NeighborCacheKey,
    NeighborIndex,
    NeighborTable,
)

logger = logging.getLogger(__name__)

NEIGHBOR_CACHE_NAMESPACE = "neighbors"
SIMILARITY_CACHE_NAMESPACE = "similarity"
INDEX_FILENAME = "index.sqlite"
LOCK_FILENAME = "index.lock"


def _namespace_root(settings: Settings, namespace: str) -> Path:
    root = settings.cache_root / namespace
    root.mkdir(parents=True, exist_ok=True)
    return root


def _index_path(settings: Settings) -> Path:
    return _namespace_root(settings, NEIGHBOR_CACHE_NAMESPACE) / INDEX_FILENAME


def _lock_path(settings: Settings, namespace: str) -> Path:
    return _namespace_root(settings, namespace) / LOCK_FILENAME


def _similarity_path(settings: Settings, key: NeighborCacheKey) -> Path:
    root = _namespace_root(settings, SIMILARITY_CACHE_NAMESPACE)
    return root / f"{key.similarity_slug}.npy"


@contextmanager
def _acquire_lock(settings: Settings, namespace: str) -> Iterator[None]:
    lock = FileLock(str(_lock_path(settings, namespace)))
    lock.acquire()
    try:
        yield
    finally:
        lock.release()


def load_neighbor_index(settings: Settings) -> NeighborIndex:
    """Load the neighbor index without acquiring a lock."""
    return NeighborIndex.load(_index_path(settings))


def get_cached_neighbors(settings: Settings, key: NeighborCacheKey) -> Optional[NeighborTable]:
    index = load_neighbor_index(settings)
    try:
        entry = index.get(key.slug)
    finally:
        index.close()
    if entry is None:
        return None
    logger.debug("Neighbor cache hit for %s", key.slug)
    return entry.table


def cache_neighbor_table(settings: Settings, key: NeighborCacheKey, table: NeighborTable) -> None:
    with _acquire_lock(settings, NEIGHBOR_CACHE_NAMESPACE):
        index = load_neighbor_index(settings)
        try:
            index.add(NeighborCacheEntry.from_table(key, table))
            logger.debug("Cached %s; index holds %d tables", key.slug, index.count())
        finally:
            index.close()


def invalidate_neighbors(settings: Settings, key: NeighborCacheKey) -> bool:
    """Drop one cached table; returns whether an entry existed."""
    with _acquire_lock(settings, NEIGHBOR_CACHE_NAMESPACE):
        index = load_neighbor_index(settings)
        try:
            return index.remove(key.slug)
        finally:
            index.close()


def get_cached_similarity(settings: Settings, key: NeighborCacheKey) -> Optional[np.ndarray]:
    path = _similarity_path(settings, key)
    if not path.exists():
        return None
    logger.debug("Similarity cache hit for %s", key.similarity_slug)
    return np.load(path, allow_pickle=False)


def cache_similarity(settings: Settings, key: NeighborCacheKey, matrix: np.ndarray) -> Path:
    path = _similarity_path(settings, key)
    with _acquire_lock(settings, SIMILARITY_CACHE_NAMESPACE):
        tmp_path = path.with_name(path.stem + ".tmp.npy")
        np.save(tmp_path, np.asarray(matrix, dtype=np.float64), allow_pickle=False)
        tmp_path.replace(path)
    return path


__all__ = [
    "NEIGHBOR_CACHE_NAMESPACE",
    "SIMILARITY_CACHE_NAMESPACE",
    "cache_neighbor_table",
    "cache_similarity",
    "get_cached_neighbors",
    "get_cached_similarity",
    "invalidate_neighbors",
    "load_neighbor_index",
]
