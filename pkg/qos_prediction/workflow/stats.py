"""Counters and timing for the neighbor, experiment and sweep stages."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Union


@dataclass
class StageMetrics:
    """What one stage produced, reused from cache or lost to failures, and how long it took."""

    produced: int = 0
    cache_hits: int = 0
    failed: int = 0
    seconds: float = 0.0

    def record_produced(self, count: int = 1) -> None:
        self.produced += max(0, count)

    def record_cache_hits(self, count: int = 1) -> None:
        self.cache_hits += max(0, count)

    def record_failed(self, count: int = 1) -> None:
        self.failed += max(0, count)

    @property
    def total(self) -> int:
        return self.produced + self.cache_hits + self.failed

    @contextmanager
    def timed(self) -> Iterator["StageMetrics"]:
        start = time.perf_counter()
        try:
            yield self
        finally:
            self.seconds += time.perf_counter() - start

    def to_dict(self) -> Dict[str, Union[int, float]]:
        return asdict(self)


__all__ = ["StageMetrics"]
