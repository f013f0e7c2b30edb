"""Comparison table in the published layout: MAE and RMSE per density plus Improve columns.

Improve is the relative gain of FIEMF over a method, ``(m - fiemf) / m * 100``,
computed per density and then averaged across densities.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from qos_prediction.config import METHODS, Settings
from qos_prediction.models import EvalReport
from qos_prediction.services.logging import console_kwargs

from .reference import REFERENCE_PROVENANCE, REFERENCE_ROWS, reference_frame

logger = logging.getLogger(__name__)

COMPARISON_CSV = "comparison.csv"
TARGET_METHOD = "fiemf"
_METRICS = ("mae", "rmse")


def density_label(density: float) -> str:
    return f"D={density * 100:g}%"


def _metric_column(metric: str, density: float) -> str:
    return f"{metric.upper()} {density_label(density)}"


def _improve_column(metric: str, density: Optional[float] = None) -> str:
    if density is None:
        return f"{metric.upper()} Improve"
    return f"{metric.upper()} Improve {density_label(density)}"


def _method_order(methods: Sequence[str]) -> List[str]:
    known = (*METHODS[:-1], "nimf", "nbmf", TARGET_METHOD)
    ordered = [method for method in known if method in methods]
    return ordered + sorted(method for method in methods if method not in known)


def _wide(long_frame: pd.DataFrame, densities: Sequence[float]) -> pd.DataFrame:
    """One row per method with one column per (metric, density) and Improve columns."""
    rows: List[Dict[str, object]] = []
    means = long_frame.set_index(["method", "density"])
    methods = _method_order(long_frame["method"].unique().tolist())
    for method in methods:
        row: Dict[str, object] = {"method": method}
        for metric in _METRICS:
            for density in densities:
                key = (method, density)
                row[_metric_column(metric, density)] = (
                    float(means.loc[key, metric]) if key in means.index else np.nan
                )
        rows.append(row)
    wide = pd.DataFrame(rows)

    target = wide.loc[wide["method"] == TARGET_METHOD]
    for metric in _METRICS:
        per_density: List[str] = []
        for density in densities:
            column = _metric_column(metric, density)
            improve = _improve_column(metric, density)
            if target.empty:
                wide[improve] = np.nan
            else:
                reference = float(target[column].iloc[0])
                wide[improve] = (wide[column] - reference) / wide[column] * 100.0
            per_density.append(improve)
        summary = _improve_column(metric)
        wide[summary] = wide[per_density].mean(axis=1, skipna=False)
        wide.loc[wide["method"] == TARGET_METHOD, [*per_density, summary]] = np.nan
    return wide


def _ordered_columns(densities: Sequence[float]) -> List[str]:
    columns = ["method", "provenance"]
    for metric in _METRICS:
        columns.extend(_metric_column(metric, density) for density in densities)
        columns.append(_improve_column(metric))
    for metric in _METRICS:
        columns.extend(_improve_column(metric, density) for density in densities)
    return columns


def build_comparison_table(
    report: EvalReport,
    *,
    include_reference: bool = False,
    densities: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """Seed-averaged comparison of the run, optionally followed by the published rows."""
    aggregates = report.aggregates().rename(columns={"mae_mean": "mae", "rmse_mean": "rmse"})
    if densities is None:
        densities = sorted(aggregates["density"].unique().tolist())
    densities = [float(density) for density in densities]

    tables: List[pd.DataFrame] = []
    if not aggregates.empty:
        run = _wide(aggregates[["method", "density", "mae", "rmse"]], densities)
        run.insert(1, "provenance", "run")
        tables.append(run)
    if include_reference:
        published = _wide(reference_frame(), densities)
        published.insert(1, "provenance", REFERENCE_PROVENANCE)
        tables.append(published)
    if not tables:
        return pd.DataFrame(columns=_ordered_columns(densities))
    return pd.concat(tables, ignore_index=True)[_ordered_columns(densities)]


def published_improvements() -> pd.DataFrame:
    """Improve figures exactly as printed alongside the published table."""
    return pd.DataFrame(
        [
            {
                "method": row.method,
                "mae_improve": row.mae_improve,
                "rmse_improve": row.rmse_improve,
            }
            for row in REFERENCE_ROWS.values()
        ]
    )


def write_comparison(
    settings: Settings, table: pd.DataFrame, directory: Optional[Path] = None
) -> Path:
    directory = directory or settings.output_dir
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / COMPARISON_CSV
    table.to_csv(path, index=False, float_format="%.4f")
    logger.info("Wrote comparison table %s", path, extra=console_kwargs())
    return path


__all__ = [
    "COMPARISON_CSV",
    "build_comparison_table",
    "density_label",
    "published_improvements",
    "write_comparison",
]
