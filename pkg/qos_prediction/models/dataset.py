"""Dataset data models: sparse QoS observations, user regions and splits."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import DatasetIntegrityError


@dataclass(frozen=True, eq=False)
class QosMatrix:
    """Sparse user x service QoS observations (response time, seconds).

    Entries are stored as three parallel arrays sorted by (user, service).
    Use :meth:`from_triplets` to build a validated instance.
    """

    num_users: int
    num_services: int
    users: np.ndarray
    services: np.ndarray
    values: np.ndarray

    @classmethod
    def from_triplets(
        cls,
        num_users: int,
        num_services: int,
        users: Sequence[int] | np.ndarray,
        services: Sequence[int] | np.ndarray,
        values: Sequence[float] | np.ndarray,
    ) -> "QosMatrix":
        if num_users <= 0 or num_services <= 0:
            raise ValueError("QosMatrix dimensions must be positive")

        user_arr = np.asarray(users, dtype=np.int64).ravel()
        service_arr = np.asarray(services, dtype=np.int64).ravel()
        value_arr = np.asarray(values, dtype=np.float64).ravel()
        if not (user_arr.shape == service_arr.shape == value_arr.shape):
            raise ValueError("users, services and values must have the same length")

        if user_arr.size:
            if user_arr.min() < 0 or user_arr.max() >= num_users:
                raise ValueError("user index out of range")
            if service_arr.min() < 0 or service_arr.max() >= num_services:
                raise ValueError("service index out of range")
            if not np.all(np.isfinite(value_arr)) or np.any(value_arr <= 0):
                raise ValueError("QoS values must be finite and positive")

        order = np.lexsort((service_arr, user_arr))
        user_arr = user_arr[order]
        service_arr = service_arr[order]
        value_arr = value_arr[order]
        if user_arr.size > 1:
            same = (np.diff(user_arr) == 0) & (np.diff(service_arr) == 0)
            if np.any(same):
                idx = int(np.flatnonzero(same)[0])
                raise DatasetIntegrityError(
                    "duplicate entry for "
                    f"(user {user_arr[idx]}, service {service_arr[idx]})"
                )

        for arr in (user_arr, service_arr, value_arr):
            arr.setflags(write=False)
        return cls(
            num_users=int(num_users),
            num_services=int(num_services),
            users=user_arr,
            services=service_arr,
            values=value_arr,
        )

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QosMatrix):
            return NotImplemented
        return (
            self.num_users == other.num_users
            and self.num_services == other.num_services
            and np.array_equal(self.users, other.users)
            and np.array_equal(self.services, other.services)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.num_users, self.num_services

    @property
    def value_range(self) -> Tuple[float, float]:
        if not len(self):
            raise ValueError("value range is undefined for an empty matrix")
        return float(self.values.min()), float(self.values.max())

    @cached_property
    def global_mean(self) -> float:
        if not len(self):
            raise ValueError("global mean is undefined for an empty matrix")
        return float(self.values.mean())

    @cached_property
    def median(self) -> float:
        if not len(self):
            raise ValueError("median is undefined for an empty matrix")
        return float(np.median(self.values))

    @property
    def density(self) -> float:
        return len(self) / float(self.num_users * self.num_services)

    def entries(self) -> Iterator[Tuple[int, int, float]]:
        for user, service, value in zip(self.users, self.services, self.values):
            yield int(user), int(service), float(value)

    def entry_set(self) -> set[Tuple[int, int, float]]:
        return set(self.entries())

    def subset(self, mask: np.ndarray) -> "QosMatrix":
        """Return the entries selected by a boolean mask over the canonical order."""
        return QosMatrix.from_triplets(
            self.num_users,
            self.num_services,
            self.users[mask],
            self.services[mask],
            self.values[mask],
        )

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.values, (self.users, self.services)),
            shape=self.shape,
        )

    @cached_property
    def user_offsets(self) -> np.ndarray:
        """CSR-style row pointer: entries of user ``u`` live in ``[off[u], off[u+1])``."""
        counts = np.bincount(self.users, minlength=self.num_users)
        offsets = np.zeros(self.num_users + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets

    def user_entries(self, user: int) -> Tuple[np.ndarray, np.ndarray]:
        """Return (service ids, values) observed by ``user``, service ids ascending."""
        if not 0 <= user < self.num_users:
            raise ValueError(f"user {user} out of range")
        start, stop = self.user_offsets[user], self.user_offsets[user + 1]
        return self.services[start:stop], self.values[start:stop]

    def user_ratings(self, user: int) -> Dict[int, float]:
        services, values = self.user_entries(user)
        return {int(s): float(v) for s, v in zip(services, values)}

    @cached_property
    def user_counts(self) -> np.ndarray:
        return np.bincount(self.users, minlength=self.num_users)

    @cached_property
    def service_counts(self) -> np.ndarray:
        return np.bincount(self.services, minlength=self.num_services)

    @cached_property
    def user_sums(self) -> np.ndarray:
        return np.bincount(self.users, weights=self.values, minlength=self.num_users)

    @cached_property
    def service_sums(self) -> np.ndarray:
        return np.bincount(self.services, weights=self.values, minlength=self.num_services)

    def to_dense(self, fill_value: float = np.nan) -> np.ndarray:
        dense = np.full(self.shape, fill_value, dtype=np.float64)
        dense[self.users, self.services] = self.values
        return dense


@dataclass(frozen=True)
class UserRegionTable:
    """Country-level region label for every user, indexed by user id."""

    labels: Tuple[str, ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, str]) -> "UserRegionTable":
        if not mapping:
            raise DatasetIntegrityError("user region table is empty")
        max_id = max(mapping)
        missing = [user for user in range(max_id + 1) if user not in mapping]
        if missing or min(mapping) < 0:
            raise DatasetIntegrityError(
                "user ids missing from region table: " + ", ".join(str(i) for i in missing),
                missing_ids=missing,
            )
        return cls(labels=tuple(str(mapping[user]).strip() for user in range(max_id + 1)))

    @property
    def num_users(self) -> int:
        return len(self.labels)

    @property
    def regions(self) -> List[str]:
        return sorted(set(self.labels))

    def region_of(self, user: int) -> str:
        return self.labels[user]

    def as_dict(self) -> Dict[int, str]:
        return dict(enumerate(self.labels))

    def ensure_covers(self, num_users: int) -> None:
        if self.num_users < num_users:
            missing = list(range(self.num_users, num_users))
            raise DatasetIntegrityError(
                f"region table covers {self.num_users} users but the QoS matrix has {num_users}",
                missing_ids=missing,
            )


@dataclass(frozen=True, eq=False)
class Split:
    """Disjoint train/test partition of a source QosMatrix."""

    train: QosMatrix
    test: QosMatrix
    density: float
    seed: int
    source_fingerprint: str = field(default="")

    @property
    def slug(self) -> str:
        return f"d{self.density:g}-s{self.seed}"


@dataclass(frozen=True)
class DatasetSummary:
    num_users: int
    num_services: int
    num_records: int
    density: float
    value_min: float
    value_max: float
    num_regions: Optional[int] = None

    def headline(self) -> str:
        return f"{self.num_users} users, {self.num_services} services, {self.num_records} records"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


__all__ = ["DatasetSummary", "QosMatrix", "Split", "UserRegionTable"]
