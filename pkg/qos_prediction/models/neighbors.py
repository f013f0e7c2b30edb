"""Fuzzy-similarity data models: relationship matrices, entropies and neighbor sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy import sparse


@dataclass(frozen=True, eq=False)
class RelationshipMatrix:
    """Fuzzy equivalence degrees between a user's services over ``index_set``."""

    index_set: Tuple[int, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.index_set)
        if self.cells.shape != (n, n):
            raise ValueError(
                f"relationship matrix shape {self.cells.shape} does not match index set size {n}"
            )

    @property
    def size(self) -> int:
        return len(self.index_set)

    def cell(self, x: int, y: int) -> float:
        """Return the degree for the services at positions ``x`` and ``y``."""
        return float(self.cells[x, y])


@dataclass(frozen=True)
class EntropyProfile:
    user_id: int
    fie: float
    num_services: int


@dataclass(frozen=True)
class Neighbor:
    neighbor_id: int
    similarity: float
    weight: float


@dataclass(frozen=True)
class NeighborSet:
    """Top-K similar users of ``user_id`` with normalized weights."""

    user_id: int
    neighbors: Tuple[Neighbor, ...] = ()

    def __len__(self) -> int:
        return len(self.neighbors)

    @property
    def ids(self) -> List[int]:
        return [neighbor.neighbor_id for neighbor in self.neighbors]

    @property
    def weights(self) -> np.ndarray:
        return np.array([neighbor.weight for neighbor in self.neighbors], dtype=np.float64)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "user_id": self.user_id,
            "neighbors": [
                [n.neighbor_id, n.similarity, n.weight] for n in self.neighbors
            ],
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "NeighborSet":
        return cls(
            user_id=int(payload["user_id"]),
            neighbors=tuple(
                Neighbor(int(item[0]), float(item[1]), float(item[2]))
                for item in payload.get("neighbors", [])
            ),
        )


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """One NeighborSet per user, plus the sparse views the trainer consumes."""

    sets: Tuple[NeighborSet, ...]

    @classmethod
    def empty(cls, num_users: int) -> "NeighborTable":
        return cls(sets=tuple(NeighborSet(user_id=user) for user in range(num_users)))

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, user: int) -> NeighborSet:
        return self.sets[user]

    @property
    def num_users(self) -> int:
        return len(self.sets)

    @cached_property
    def weight_matrix(self) -> sparse.csr_matrix:
        """Row ``i`` holds ``omega`` for each neighbor of user ``i``."""
        rows: List[int] = []
        cols: List[int] = []
        data: List[float] = []
        for neighbor_set in self.sets:
            for neighbor in neighbor_set.neighbors:
                rows.append(neighbor_set.user_id)
                cols.append(neighbor.neighbor_id)
                data.append(neighbor.weight)
        return sparse.csr_matrix(
            (
                np.asarray(data, dtype=np.float64),
                (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)),
            ),
            shape=(self.num_users, self.num_users),
        )

    def csr_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (indptr, indices, weights) in neighbor-list order."""
        indptr = np.zeros(self.num_users + 1, dtype=np.int64)
        indices: List[int] = []
        weights: List[float] = []
        for neighbor_set in self.sets:
            indptr[neighbor_set.user_id + 1] = len(neighbor_set.neighbors)
            indices.extend(neighbor_set.ids)
            weights.extend(n.weight for n in neighbor_set.neighbors)
        np.cumsum(indptr, out=indptr)
        return (
            indptr,
            np.asarray(indices, dtype=np.int64),
            np.asarray(weights, dtype=np.float64),
        )

    def reverse_csr_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """For each user ``a``: the users ``k`` with ``a`` in N(k) and weight omega_{k,a}."""
        transposed = self.weight_matrix.T.tocsr()
        transposed.sort_indices()
        return (
            transposed.indptr.astype(np.int64),
            transposed.indices.astype(np.int64),
            transposed.data.astype(np.float64),
        )

    def to_records(self) -> List[Tuple[int, int, float, float]]:
        return [
            (neighbor_set.user_id, n.neighbor_id, n.similarity, n.weight)
            for neighbor_set in self.sets
            for n in neighbor_set.neighbors
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"sets": [neighbor_set.to_dict() for neighbor_set in self.sets]}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "NeighborTable":
        return cls(sets=tuple(NeighborSet.from_dict(item) for item in payload["sets"]))

    @classmethod
    def from_sets(cls, num_users: int, sets: Sequence[NeighborSet]) -> "NeighborTable":
        by_user = {neighbor_set.user_id: neighbor_set for neighbor_set in sets}
        return cls(
            sets=tuple(by_user.get(user, NeighborSet(user_id=user)) for user in range(num_users))
        )


@dataclass
class SimilarityDiagnostics:
    """Counters collected while computing pairwise similarities."""

    pairs_evaluated: int = 0
    pairs_below_threshold: int = 0
    pairs_capped: int = 0
    clamp_events: int = 0

    def merge(self, other: "SimilarityDiagnostics") -> None:
        self.pairs_evaluated += other.pairs_evaluated
        self.pairs_below_threshold += other.pairs_below_threshold
        self.pairs_capped += other.pairs_capped
        self.clamp_events += other.clamp_events

    def to_dict(self) -> Dict[str, int]:
        return {
            "pairs_evaluated": self.pairs_evaluated,
            "pairs_below_threshold": self.pairs_below_threshold,
            "pairs_capped": self.pairs_capped,
            "clamp_events": self.clamp_events,
        }


@dataclass(frozen=True, eq=False)
class SimilarityResult:
    """Symmetric similarity matrix with the diagnostics gathered while building it."""

    matrix: np.ndarray
    diagnostics: SimilarityDiagnostics = field(default_factory=SimilarityDiagnostics)


__all__ = [
    "EntropyProfile",
    "Neighbor",
    "NeighborSet",
    "NeighborTable",
    "RelationshipMatrix",
    "SimilarityDiagnostics",
    "SimilarityResult",
]
