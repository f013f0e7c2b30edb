"""Service layer: dataset I/O, similarity, region bias, metrics, caching and logging."""

from __future__ import annotations

from importlib import import_module

from . import cache, dataset, logging, metrics, region, similarity
from .dataset import (
    dataset_fingerprint,
    describe_dataset,
    load_rt_matrix,
    load_user_regions,
    split,
)
from .metrics import mae, rmse
from .region import build_region_model
from .similarity import build_neighbor_table, fie_similarity, similarity_matrix, top_k_neighbors

__all__ = [
    "build_neighbor_table",
    "build_region_model",
    "cache",
    "checkpoint",
    "dataset",
    "dataset_fingerprint",
    "describe_dataset",
    "fie_similarity",
    "load_checkpoint",
    "load_rt_matrix",
    "load_user_regions",
    "logging",
    "mae",
    "metrics",
    "region",
    "rmse",
    "save_checkpoint",
    "similarity",
    "similarity_matrix",
    "split",
    "top_k_neighbors",
]


def __getattr__(name: str):
    if name in ("checkpoint", "load_checkpoint", "save_checkpoint"):
        module = import_module(".checkpoint", __name__)
        return module if name == "checkpoint" else getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
