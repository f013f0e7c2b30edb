"""Cache envelope models for neighbor tables computed from a training split."""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import (
    Any,
    ClassVar,
    Dict,
    Generic,
    List,
    Mapping,
    Optional,
    Sequence,
    Type,
    TypeVar,
)

from .neighbors import NeighborTable

CACHE_SCHEMA_VERSION = 1


PayloadT = TypeVar("PayloadT")
EnvelopeT = TypeVar("EnvelopeT", bound="CacheEnvelope[Any]")


@dataclass
class CacheEnvelope(Generic[PayloadT]):
    """Generic wrapper that pairs a payload with cache metadata."""

    slug: str
    payload: PayloadT
    cached_at: datetime = field(default_factory=datetime.utcnow)
    metadata: Dict[str, Any] = field(default_factory=dict)

    payload_cls: ClassVar[Type[Any]]

    def cache_key(self) -> str:
        return self.slug

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slug": self.slug,
            "cached_at": self.cached_at.isoformat(),
            "metadata": dict(self.metadata),
            "payload": self._encode_payload(),
        }

    def _encode_payload(self) -> Dict[str, Any]:
        encoder = getattr(self.payload, "to_dict", None)
        if callable(encoder):
            return encoder()
        raise TypeError(f"Cache payload {type(self.payload)!r} does not support serialization")

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "CacheEnvelope[PayloadT]":
        decoded = cls.payload_cls.from_dict(payload.get("payload", {}))
        cached_raw = payload.get("cached_at")
        cached_at = datetime.fromisoformat(str(cached_raw)) if cached_raw else datetime.utcnow()
        return cls(
            slug=str(payload["slug"]),
            payload=decoded,
            cached_at=cached_at,
            metadata=dict(payload.get("metadata", {})),
        )


class CacheIndex(Generic[EnvelopeT]):
    """SQLite-backed index for cache envelopes."""

    table_name: ClassVar[str] = "cache_entries"
    envelope_type: ClassVar[Type[Any]]
    extra_columns: ClassVar[Mapping[str, str]] = {}

    def __init__(self, connection: sqlite3.Connection, index_path: Path):
        self._conn = connection
        self.index_path = index_path
        self.version = CACHE_SCHEMA_VERSION
        self._initialize()

    def close(self) -> None:
        self._conn.close()

    @classmethod
    def load(cls, index_path: Path) -> "CacheIndex[EnvelopeT]":
        index_path.parent.mkdir(parents=True, exist_ok=True)
        connection = sqlite3.connect(index_path)
        connection.row_factory = sqlite3.Row
        connection.execute("PRAGMA journal_mode=WAL;")
        connection.execute("PRAGMA synchronous=NORMAL;")
        return cls(connection, index_path)

    def _initialize(self) -> None:
        columns_sql = "".join(
            f", {name} {definition}" for name, definition in self.extra_columns.items()
        )
        self._conn.execute(
            f"""
            CREATE TABLE IF NOT EXISTS {self.table_name} (
                slug TEXT PRIMARY KEY,
                payload_json BLOB NOT NULL,
                cached_at TEXT NOT NULL,
                metadata_json BLOB
                {columns_sql}
            )
            """
        )
        cursor = self._conn.execute(f"PRAGMA table_info({self.table_name})")
        existing = {row["name"] for row in cursor}
        for name, definition in self.extra_columns.items():
            if name not in existing:
                self._conn.execute(f"ALTER TABLE {self.table_name} ADD COLUMN {name} {definition}")
        self._conn.commit()

    def _column_names(self) -> List[str]:
        return ["slug", "payload_json", "cached_at", "metadata_json", *self.extra_columns]

    def add_entries(self, entries: Sequence[EnvelopeT]) -> None:
        if not entries:
            return
        column_names = self._column_names()
        placeholders = ", ".join("?" for _ in column_names)
        assignments = ", ".join(
            f"{column}=excluded.{column}" for column in column_names if column != "slug"
        )
        sql = (
            f"INSERT INTO {self.table_name} ({', '.join(column_names)}) "
            f"VALUES ({placeholders}) "
            f"ON CONFLICT(slug) DO UPDATE SET {assignments}"
        )
        rows = [self._row_from_entry(entry) for entry in entries]
        with self._conn:
            self._conn.executemany(sql, rows)

    def add(self, entry: EnvelopeT) -> None:
        self.add_entries([entry])

    def get(self, slug: str) -> Optional[EnvelopeT]:
        cursor = self._conn.execute(f"SELECT * FROM {self.table_name} WHERE slug = ?", (slug,))
        row = cursor.fetchone()
        return None if row is None else self._entry_from_row(row)

    def remove(self, slug: str) -> bool:
        with self._conn:
            cursor = self._conn.execute(f"DELETE FROM {self.table_name} WHERE slug = ?", (slug,))
        return cursor.rowcount > 0

    def count(self) -> int:
        result = self._conn.execute(f"SELECT COUNT(*) FROM {self.table_name}").fetchone()
        return 0 if result is None else int(result[0])

    def _entry_from_row(self, row: sqlite3.Row) -> EnvelopeT:
        metadata_blob = row["metadata_json"]
        return self.envelope_type.from_dict(
            {
                "slug": row["slug"],
                "cached_at": row["cached_at"],
                "metadata": json.loads(metadata_blob) if metadata_blob else {},
                "payload": json.loads(row["payload_json"]),
            }
        )

    def _extra_values(self, entry: EnvelopeT) -> Dict[str, Any]:  # pragma: no cover - hook
        return {}

    def _row_from_entry(self, entry: EnvelopeT) -> tuple[Any, ...]:
        values: List[Any] = [
            entry.cache_key(),
            json.dumps(entry._encode_payload()),
            entry.cached_at.isoformat(),
            json.dumps(dict(entry.metadata)),
        ]
        extras = self._extra_values(entry)
        values.extend(extras.get(column) for column in self.extra_columns)
        return tuple(values)


@dataclass(frozen=True)
class NeighborCacheKey:
    """Everything a cached neighbor table depends on."""

    fingerprint: str
    density: float
    seed: int
    r_med_mode: str
    pair_cap: int
    min_corated: int
    neighbors: int
    cap_seed: int = 0

    @property
    def similarity_slug(self) -> str:
        """Slug shared by every K over the same similarity matrix."""
        return (
            f"{self.fingerprint}-d{self.density:g}-s{self.seed}"
            f"-{self.r_med_mode}-cap{self.pair_cap}-cs{self.cap_seed}-c{self.min_corated}"
        )

    @property
    def slug(self) -> str:
        return f"{self.similarity_slug}-k{self.neighbors}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fingerprint": self.fingerprint,
            "density": self.density,
            "seed": self.seed,
            "r_med_mode": self.r_med_mode,
            "pair_cap": self.pair_cap,
            "min_corated": self.min_corated,
            "neighbors": self.neighbors,
            "cap_seed": self.cap_seed,
        }


@dataclass
class NeighborCacheEntry(CacheEnvelope[NeighborTable]):
    """Envelope for a cached top-K neighbor table."""

    payload_cls: ClassVar[Type[NeighborTable]] = NeighborTable

    @classmethod
    def from_table(cls, key: NeighborCacheKey, table: NeighborTable) -> "NeighborCacheEntry":
        return cls(slug=key.slug, payload=table, metadata=key.to_dict())

    @property
    def table(self) -> NeighborTable:
        return self.payload


class NeighborIndex(CacheIndex[NeighborCacheEntry]):
    """Index for neighbor-table envelopes."""

    table_name: ClassVar[str] = "neighbor_tables"
    envelope_type: ClassVar[Type[NeighborCacheEntry]] = NeighborCacheEntry
    extra_columns: ClassVar[Mapping[str, str]] = {
        "fingerprint": "TEXT",
        "density": "REAL",
        "seed": "INTEGER",
        "neighbors": "INTEGER",
    }

    def _extra_values(self, entry: NeighborCacheEntry) -> Dict[str, Any]:
        return {column: entry.metadata.get(column) for column in self.extra_columns}


__all__ = [
    "CACHE_SCHEMA_VERSION",
    "CacheEnvelope",
    "CacheIndex",
    "NeighborCacheEntry",
    "NeighborCacheKey",
    "NeighborIndex",
]
