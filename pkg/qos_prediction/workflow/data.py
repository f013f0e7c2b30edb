"""Dataset stage: load and validate the QoS matrix and user list, draw splits."""

from __future__ import annotations

import logging
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import pandas as pd

from qos_prediction.config import Settings
from qos_prediction.models import DatasetSummary, QosMatrix, RegionModel, Split, UserRegionTable
from qos_prediction.services.dataset import (
    dataset_fingerprint,
    describe_dataset,
    export_split,
    load_rt_matrix,
    load_user_regions,
    split,
)
from qos_prediction.services.logging import console_kwargs
from qos_prediction.services.region import build_region_model, export_region_means
from qos_prediction.services.similarity import entropy_profiles

logger = logging.getLogger(__name__)

REGION_MEANS_CSV = "region_means.csv"
ENTROPY_CSV = "entropy.csv"


@dataclass(eq=False)
class ExperimentData:
    """A loaded dataset plus per-split memoization shared across cells."""

    matrix: QosMatrix
    regions: UserRegionTable
    fingerprint: str
    _splits: Dict[Tuple[float, int], Split] = field(default_factory=dict, repr=False)
    _region_models: Dict[Tuple[float, int, bool], RegionModel] = field(
        default_factory=dict, repr=False
    )
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def split(self, density: float, seed: int) -> Split:
        key = (float(density), int(seed))
        with self._lock:
            cached = self._splits.get(key)
        if cached is not None:
            return cached
        drawn = split(self.matrix, density, seed)
        with self._lock:
            return self._splits.setdefault(key, drawn)

    def region_model(self, data_split: Split, *, include_self: bool = False) -> RegionModel:
        key = (data_split.density, data_split.seed, include_self)
        with self._lock:
            cached = self._region_models.get(key)
        if cached is not None:
            return cached
        model = build_region_model(
            data_split.train, self.regions, include_self=include_self
        )
        with self._lock:
            return self._region_models.setdefault(key, model)

    def summary(self) -> DatasetSummary:
        return describe_dataset(self.matrix, self.regions)


def load_dataset(rt_path: Path, user_path: Path, settings: Settings) -> ExperimentData:
    matrix = load_rt_matrix(rt_path)
    regions = load_user_regions(
        user_path,
        user_id_column=settings.user_id_column,
        country_column=settings.country_column,
    )
    regions.ensure_covers(matrix.num_users)
    return ExperimentData(
        matrix=matrix,
        regions=regions,
        fingerprint=dataset_fingerprint(matrix),
    )


def load_experiment_data(settings: Settings) -> ExperimentData:
    rt_path, user_path = settings.require_dataset_paths()
    return load_dataset(rt_path, user_path, settings)


def prepare_dataset(
    settings: Settings,
    *,
    rt_path: Optional[Path] = None,
    user_path: Optional[Path] = None,
) -> Tuple[ExperimentData, DatasetSummary]:
    """Validate the dataset files and summarize them."""
    if rt_path is None or user_path is None:
        configured_rt, configured_users = settings.require_dataset_paths()
        rt_path = rt_path or configured_rt
        user_path = user_path or configured_users
    data = load_dataset(rt_path, user_path, settings)
    summary = data.summary()
    logger.info("Dataset %s: %s", data.fingerprint, summary.headline(), extra=console_kwargs())
    return data, summary


def split_directory(settings: Settings, data: ExperimentData, data_split: Split) -> Path:
    return settings.data_root / "splits" / data.fingerprint / data_split.slug


def write_split(settings: Settings, data: ExperimentData, density: float, seed: int) -> Path:
    """Draw one split and export it with its region means and entropy profiles.

    Returns the split directory.
    """
    data_split = data.split(density, seed)
    directory = split_directory(settings, data, data_split)
    export_split(data_split, directory)
    region_model = data.region_model(data_split, include_self=settings.region_include_self)
    export_region_means(region_model, directory / REGION_MEANS_CSV)
    profiles = entropy_profiles(data_split.train, settings.similarity)
    pd.DataFrame([asdict(profile) for profile in profiles]).to_csv(
        directory / ENTROPY_CSV, index=False, float_format="%.17g"
    )
    logger.info(
        "Split %s: %d train / %d test entries -> %s",
        data_split.slug,
        len(data_split.train),
        len(data_split.test),
        directory,
        extra=console_kwargs(),
    )
    return directory


__all__ = [
    "ExperimentData",
    "load_dataset",
    "load_experiment_data",
    "prepare_dataset",
    "split_directory",
    "write_split",
]
