"""Country-level region bias centers.

``mu(i)`` pools every training entry of the users sharing ``i``'s region,
excluding ``i`` itself unless ``include_self`` is set, and falls back to the
global training mean when nothing is left to pool.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Mapping, Sequence, Union

import numpy as np
import pandas as pd

from qos_prediction.models import (
    BiasVectors,
    DatasetIntegrityError,
    QosMatrix,
    RegionModel,
    UserRegionTable,
)

logger = logging.getLogger(__name__)

Assignment = Union[UserRegionTable, Mapping[int, str], Sequence[str]]


def assign_regions(table: UserRegionTable) -> Dict[int, str]:
    return table.as_dict()


def _labels(assignment: Assignment, num_users: int) -> tuple[str, ...]:
    if isinstance(assignment, UserRegionTable):
        assignment.ensure_covers(num_users)
        return assignment.labels[:num_users]
    if isinstance(assignment, Mapping):
        missing = [user for user in range(num_users) if user not in assignment]
        if missing:
            raise DatasetIntegrityError(
                f"{len(missing)} users have no region", missing_ids=missing
            )
        return tuple(str(assignment[user]) for user in range(num_users))
    labels = tuple(str(label) for label in assignment)
    if len(labels) < num_users:
        raise DatasetIntegrityError(
            f"region assignment covers {len(labels)} of {num_users} users",
            missing_ids=range(len(labels), num_users),
        )
    return labels[:num_users]


def region_mean(
    i: int,
    train: QosMatrix,
    assignment: Assignment,
    *,
    include_self: bool = False,
) -> float:
    """Mean of the pooled training entries of ``i``'s region-mates."""
    labels = _labels(assignment, train.num_users)
    region = labels[i]
    members = [
        user
        for user, label in enumerate(labels)
        if label == region and (include_self or user != i)
    ]
    pooled = [train.user_entries(user)[1] for user in members]
    values = np.concatenate(pooled) if pooled else np.empty(0)
    if values.size == 0:
        return train.global_mean
    return float(values.mean())


def build_region_model(
    train: QosMatrix,
    assignment: Assignment,
    *,
    include_self: bool = False,
) -> RegionModel:
    """Precompute mu for every user of ``train``; mu stays frozen during training."""
    labels = _labels(assignment, train.num_users)
    frame = pd.DataFrame(
        {
            "region": list(labels),
            "total": train.user_sums,
            "count": train.user_counts,
        }
    )
    per_region = frame.groupby("region", sort=True)[["total", "count"]].sum()
    region_totals = per_region["total"].reindex(labels).to_numpy(dtype=np.float64)
    region_counts = per_region["count"].reindex(labels).to_numpy(dtype=np.int64)

    if include_self:
        pooled_totals, pooled_counts = region_totals, region_counts
    else:
        pooled_totals = region_totals - train.user_sums
        pooled_counts = region_counts - train.user_counts

    global_mean = train.global_mean
    user_means = np.full(train.num_users, global_mean, dtype=np.float64)
    has_pool = pooled_counts > 0
    user_means[has_pool] = pooled_totals[has_pool] / pooled_counts[has_pool]
    fallbacks = int((~has_pool).sum())
    if fallbacks:
        logger.debug("%d users fall back to the global mean", fallbacks)
    user_means.setflags(write=False)

    region_means = {
        str(region): float(total / count) if count else global_mean
        for region, total, count in zip(
            per_region.index, per_region["total"], per_region["count"]
        )
    }
    return RegionModel(
        assignment=labels,
        region_means=region_means,
        region_counts={str(region): int(count) for region, count in per_region["count"].items()},
        global_mean=global_mean,
        user_means=user_means,
        include_self=include_self,
    )


def bias_predict(i: int, j: int, mu_i: float, biases: BiasVectors) -> float:
    if not 0 <= i < biases.b.size:
        raise ValueError(f"user {i} out of range")
    if not 0 <= j < biases.p.size:
        raise ValueError(f"service {j} out of range")
    return float(mu_i + biases.b[i] + biases.p[j])


def export_region_means(model: RegionModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [
            (region, model.region_means[region], model.region_counts[region])
            for region in sorted(model.region_means)
        ],
        columns=["region_label", "mean", "entry_count"],
    )
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


__all__ = [
    "assign_regions",
    "bias_predict",
    "build_region_model",
    "export_region_means",
    "region_mean",
]
