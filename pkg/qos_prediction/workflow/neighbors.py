"""Neighbor stage: fuzzy-entropy similarities and Top-K tables, cached per split."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from qos_prediction.config import Settings
from qos_prediction.models import NeighborCacheKey, NeighborTable, SimilarityOptions, Split
from qos_prediction.services.cache import (
    cache_neighbor_table,
    cache_similarity,
    get_cached_neighbors,
    get_cached_similarity,
)
from qos_prediction.services.logging import console_kwargs
from qos_prediction.services.similarity import (
    build_neighbor_table,
    export_neighbors,
    similarity_matrix,
)
from qos_prediction.utils.progress import progress_callback

from .common import stage_progress
from .stats import StageMetrics

logger = logging.getLogger(__name__)


def neighbor_cache_key(
    fingerprint: str,
    data_split: Split,
    options: SimilarityOptions,
    neighbors: int,
) -> NeighborCacheKey:
    return NeighborCacheKey(
        fingerprint=fingerprint,
        density=data_split.density,
        seed=data_split.seed,
        r_med_mode=options.r_med_mode,
        pair_cap=options.pair_cap,
        min_corated=options.min_corated,
        neighbors=neighbors,
        cap_seed=options.cap_seed,
    )


def resolve_neighbors(
    settings: Settings,
    data_split: Split,
    *,
    fingerprint: Optional[str] = None,
    neighbors: Optional[int] = None,
    metrics: Optional[StageMetrics] = None,
) -> NeighborTable:
    """Return the Top-K table for ``data_split``, computing it only on a cache miss.

    The similarity matrix is cached separately so sweeps over K reuse it.
    """
    k = neighbors if neighbors is not None else settings.fiemf.neighbors
    options = settings.similarity
    key = neighbor_cache_key(
        fingerprint or data_split.source_fingerprint, data_split, options, k
    )

    if settings.use_neighbor_cache:
        cached = get_cached_neighbors(settings, key)
        if cached is not None:
            if metrics is not None:
                metrics.record_cache_hits(1)
            logger.info("Neighbor table %s loaded from cache", key.slug, extra=console_kwargs())
            return cached

        similarities = get_cached_similarity(settings, key)
    else:
        similarities = None

    if similarities is None:
        train = data_split.train
        progress = stage_progress(
            settings, train.num_users, f"similarity {data_split.slug}", unit="user"
        )
        try:
            result = similarity_matrix(
                train,
                options,
                max_workers=settings.max_workers,
                progress_hook=progress_callback(progress),
            )
        finally:
            if progress is not None:
                progress.close()
        similarities = result.matrix
        if settings.use_neighbor_cache:
            cache_similarity(settings, key, similarities)
    elif metrics is not None:
        metrics.record_cache_hits(1)

    table = build_neighbor_table(similarities, k)
    if settings.use_neighbor_cache:
        cache_neighbor_table(settings, key, table)
    if metrics is not None:
        metrics.record_produced(1)
    empty = sum(1 for neighbor_set in table.sets if not len(neighbor_set))
    logger.info(
        "Neighbor table %s: %d users, %d without neighbors",
        key.slug,
        table.num_users,
        empty,
        extra=console_kwargs(),
    )
    return table


def write_neighbors(settings: Settings, table: NeighborTable, key: NeighborCacheKey) -> Path:
    path = settings.output_dir / "neighbors" / f"{key.slug}.csv"
    return export_neighbors(table, path)


__all__ = ["neighbor_cache_key", "resolve_neighbors", "write_neighbors"]
