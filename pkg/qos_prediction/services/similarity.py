"""Fuzzy-information-entropy similarity between users and Top-K neighbor selection.

A user's relationship matrix holds, for every pair of services it rated, the
fuzzy equivalence degree ``exp(-|r_x - r_y| / 2)`` (zero once the gap reaches
the median threshold ``r_med``). Entropies are computed from the matrix row
means. For a user pair, both matrices are built over the co-rated services only
so the joint entropy compares aligned cells.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from qos_prediction.models import (
    DatasetFormatError,
    EntropyProfile,
    Neighbor,
    NeighborSet,
    NeighborTable,
    QosMatrix,
    RelationshipMatrix,
    SimilarityDiagnostics,
    SimilarityOptions,
    SimilarityResult,
)
from qos_prediction.utils.progress import emit_progress

logger = logging.getLogger(__name__)

NEIGHBOR_COLUMNS = ["user_id", "neighbor_id", "similarity", "weight"]
_ENTROPY_BLOCK_ROWS = 512


def relationship_value(r_ux: float, r_uy: float, r_med: float) -> float:
    if r_med <= 0:
        raise ValueError(f"r_med must be positive, got {r_med}")
    gap = abs(r_ux - r_uy)
    return math.exp(-0.5 * gap) if gap < r_med else 0.0


def _relationship_cells(ratings: np.ndarray, r_med: float) -> np.ndarray:
    gaps = np.abs(ratings[:, None] - ratings[None, :])
    return np.where(gaps < r_med, np.exp(-0.5 * gaps), 0.0)


def relationship_matrix(
    user_ratings: Mapping[int, float],
    r_med: float,
    index_set: Optional[Sequence[int]] = None,
) -> RelationshipMatrix:
    """Build the relationship matrix over ``index_set`` (default: rated services, sorted)."""
    if r_med <= 0:
        raise ValueError(f"r_med must be positive, got {r_med}")
    services = tuple(sorted(user_ratings)) if index_set is None else tuple(index_set)
    if not services:
        raise ValueError("relationship matrix needs a non-empty index set")
    missing = [service for service in services if service not in user_ratings]
    if missing:
        raise ValueError(f"no rating for services {missing} in the index set")
    ratings = np.array([user_ratings[service] for service in services], dtype=np.float64)
    return RelationshipMatrix(index_set=services, cells=_relationship_cells(ratings, r_med))


def _entropy(cells: np.ndarray) -> float:
    n = cells.shape[0]
    return float(-np.mean(np.log(cells.sum(axis=1) / n)))


def fuzzy_entropy(matrix: RelationshipMatrix) -> float:
    return _entropy(matrix.cells)


def _check_aligned(ma: RelationshipMatrix, mb: RelationshipMatrix) -> None:
    if ma.index_set != mb.index_set:
        raise ValueError("relationship matrices must share the same index set")


def fuzzy_joint_entropy(ma: RelationshipMatrix, mb: RelationshipMatrix) -> float:
    _check_aligned(ma, mb)
    return _entropy(np.minimum(ma.cells, mb.cells))


def fuzzy_mutual_information(ma: RelationshipMatrix, mb: RelationshipMatrix) -> float:
    _check_aligned(ma, mb)
    return fuzzy_entropy(ma) + fuzzy_entropy(mb) - fuzzy_joint_entropy(ma, mb)


def _normalized_similarity(
    cells_a: np.ndarray,
    cells_b: np.ndarray,
    diagnostics: SimilarityDiagnostics,
) -> float:
    h_a = _entropy(cells_a)
    h_b = _entropy(cells_b)
    h_ab = _entropy(np.minimum(cells_a, cells_b))
    denominator = h_a + h_b
    if denominator == 0.0:
        return 1.0
    fmi = h_a + h_b - h_ab
    value = 2.0 * fmi * math.exp(-abs(h_a - h_b)) / denominator
    if value < 0.0 or value > 1.0:
        diagnostics.clamp_events += 1
        value = min(max(value, 0.0), 1.0)
    return value


def _pair_similarity(
    a: int,
    b: int,
    services_a: np.ndarray,
    values_a: np.ndarray,
    services_b: np.ndarray,
    values_b: np.ndarray,
    options: SimilarityOptions,
    global_median: Optional[float],
    diagnostics: SimilarityDiagnostics,
) -> float:
    diagnostics.pairs_evaluated += 1
    _, idx_a, idx_b = np.intersect1d(
        services_a, services_b, assume_unique=True, return_indices=True
    )
    if idx_a.size < options.min_corated:
        diagnostics.pairs_below_threshold += 1
        return 0.0
    if idx_a.size > options.pair_cap:
        diagnostics.pairs_capped += 1
        rng = np.random.default_rng([options.cap_seed, min(a, b), max(a, b)])
        keep = np.sort(rng.choice(idx_a.size, size=options.pair_cap, replace=False))
        idx_a, idx_b = idx_a[keep], idx_b[keep]

    ratings_a = values_a[idx_a]
    ratings_b = values_b[idx_b]
    if global_median is None:
        r_med_a = float(np.median(ratings_a))
        r_med_b = float(np.median(ratings_b))
    else:
        r_med_a = r_med_b = global_median
    return _normalized_similarity(
        _relationship_cells(ratings_a, r_med_a),
        _relationship_cells(ratings_b, r_med_b),
        diagnostics,
    )


def fie_similarity(
    a: int,
    b: int,
    train: QosMatrix,
    options: Optional[SimilarityOptions] = None,
    diagnostics: Optional[SimilarityDiagnostics] = None,
) -> float:
    """Normalized fuzzy mutual information of users ``a`` and ``b`` in [0, 1].

    Pairs with fewer than ``options.min_corated`` co-rated services score 0;
    two flat preference structures (both entropies 0) score 1.
    """
    if a == b:
        raise ValueError("similarity of a user with itself is not defined")
    options = options or SimilarityOptions()
    services_a, values_a = train.user_entries(a)
    services_b, values_b = train.user_entries(b)
    return _pair_similarity(
        a,
        b,
        services_a,
        values_a,
        services_b,
        values_b,
        options,
        train.median if options.r_med_mode == "global" else None,
        diagnostics if diagnostics is not None else SimilarityDiagnostics(),
    )


def similarity_matrix(
    train: QosMatrix,
    options: Optional[SimilarityOptions] = None,
    *,
    max_workers: int = 1,
    progress_hook: Optional[Callable[[int], None]] = None,
) -> SimilarityResult:
    """All-pairs similarities (symmetric, zero diagonal), one work item per user row."""
    options = options or SimilarityOptions()
    m = train.num_users
    entries = [train.user_entries(user) for user in range(m)]
    global_median = train.median if options.r_med_mode == "global" else None

    def _row(a: int) -> Tuple[np.ndarray, SimilarityDiagnostics]:
        diagnostics = SimilarityDiagnostics()
        row = np.zeros(m, dtype=np.float64)
        services_a, values_a = entries[a]
        for b in range(a + 1, m):
            services_b, values_b = entries[b]
            row[b] = _pair_similarity(
                a,
                b,
                services_a,
                values_a,
                services_b,
                values_b,
                options,
                global_median,
                diagnostics,
            )
        emit_progress(progress_hook)
        return row, diagnostics

    if max_workers <= 1:
        rows = [_row(a) for a in range(m)]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            rows = list(executor.map(_row, range(m)))

    upper = np.vstack([row for row, _ in rows]) if rows else np.zeros((0, 0))
    diagnostics = SimilarityDiagnostics()
    for _, row_diagnostics in rows:
        diagnostics.merge(row_diagnostics)
    matrix = np.triu(upper, k=1)
    matrix = matrix + matrix.T
    if diagnostics.clamp_events:
        logger.warning("Similarity clamped to [0, 1] for %d pairs", diagnostics.clamp_events)
    logger.info("Similarity matrix built: %s", diagnostics.to_dict())
    return SimilarityResult(matrix=matrix, diagnostics=diagnostics)


def _select_neighbors(user: int, similarities: np.ndarray, k: int) -> NeighborSet:
    candidates = np.flatnonzero(similarities > 0.0)
    candidates = candidates[candidates != user]
    if candidates.size == 0:
        return NeighborSet(user_id=user)
    scores = similarities[candidates]
    order = np.lexsort((candidates, -scores))[:k]
    chosen = candidates[order]
    chosen_scores = scores[order]
    total = float(chosen_scores.sum())
    return NeighborSet(
        user_id=user,
        neighbors=tuple(
            Neighbor(int(neighbor), float(score), float(score) / total)
            for neighbor, score in zip(chosen, chosen_scores)
        ),
    )


def top_k_neighbors(
    i: int,
    k: int,
    train: QosMatrix,
    options: Optional[SimilarityOptions] = None,
    *,
    similarities: Optional[np.ndarray] = None,
) -> NeighborSet:
    """The ``k`` most similar users of ``i`` with positive similarity; ties by user id.

    ``similarities`` may carry a precomputed row of the similarity matrix.
    """
    if k < 1:
        raise ValueError(f"K must be at least 1, got {k}")
    if not 0 <= i < train.num_users:
        raise ValueError(f"user {i} out of range")
    if similarities is None:
        options = options or SimilarityOptions()
        similarities = np.zeros(train.num_users, dtype=np.float64)
        for other in range(train.num_users):
            if other != i:
                similarities[other] = fie_similarity(i, other, train, options)
    return _select_neighbors(i, np.asarray(similarities, dtype=np.float64), k)


def build_neighbor_table(similarity: np.ndarray, k: int) -> NeighborTable:
    if k < 1:
        raise ValueError(f"K must be at least 1, got {k}")
    similarity = np.asarray(similarity, dtype=np.float64)
    if similarity.ndim != 2 or similarity.shape[0] != similarity.shape[1]:
        raise ValueError("similarity matrix must be square")
    return NeighborTable(
        sets=tuple(
            _select_neighbors(user, similarity[user], k) for user in range(similarity.shape[0])
        )
    )


def _block_entropy(ratings: np.ndarray, r_med: float) -> float:
    n = ratings.size
    log_sum = 0.0
    for start in range(0, n, _ENTROPY_BLOCK_ROWS):
        block = ratings[start : start + _ENTROPY_BLOCK_ROWS]
        gaps = np.abs(block[:, None] - ratings[None, :])
        row_sums = np.where(gaps < r_med, np.exp(-0.5 * gaps), 0.0).sum(axis=1)
        log_sum += float(np.log(row_sums / n).sum())
    return -log_sum / n


def entropy_profile(
    user: int,
    train: QosMatrix,
    options: Optional[SimilarityOptions] = None,
) -> EntropyProfile:
    """Standalone entropy of ``user`` over every service it rated in ``train``.

    A user with no training entries gets entropy 0 over an empty set.
    """
    options = options or SimilarityOptions()
    _, ratings = train.user_entries(user)
    if ratings.size == 0:
        return EntropyProfile(user_id=user, fie=0.0, num_services=0)
    r_med = train.median if options.r_med_mode == "global" else float(np.median(ratings))
    return EntropyProfile(
        user_id=user,
        fie=_block_entropy(ratings, r_med),
        num_services=int(ratings.size),
    )


def entropy_profiles(
    train: QosMatrix, options: Optional[SimilarityOptions] = None
) -> List[EntropyProfile]:
    return [entropy_profile(user, train, options) for user in range(train.num_users)]


def export_neighbors(table: NeighborTable, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(table.to_records(), columns=NEIGHBOR_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def load_neighbors(path: Path, num_users: int) -> NeighborTable:
    """Rebuild a table from CSV; row order within a user is the neighbor rank."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Neighbor file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [column for column in NEIGHBOR_COLUMNS if column not in frame.columns]
    if missing:
        raise DatasetFormatError(f"neighbor file {path} lacks columns {missing}")
    grouped: Dict[int, List[Neighbor]] = {}
    for row in frame.itertuples(index=False):
        user = int(row.user_id)
        if not 0 <= user < num_users or not 0 <= int(row.neighbor_id) < num_users:
            raise DatasetFormatError(
                f"neighbor file {path} references users outside 0..{num_users - 1}"
            )
        grouped.setdefault(user, []).append(
            Neighbor(int(row.neighbor_id), float(row.similarity), float(row.weight))
        )
    return NeighborTable.from_sets(
        num_users,
        [NeighborSet(user_id=user, neighbors=tuple(items)) for user, items in grouped.items()],
    )


__all__ = [
    "NEIGHBOR_COLUMNS",
    "build_neighbor_table",
    "entropy_profile",
    "entropy_profiles",
    "export_neighbors",
    "fie_similarity",
    "fuzzy_entropy",
    "fuzzy_joint_entropy",
    "fuzzy_mutual_information",
    "load_neighbors",
    "relationship_matrix",
    "relationship_value",
    "similarity_matrix",
    "top_k_neighbors",
]
