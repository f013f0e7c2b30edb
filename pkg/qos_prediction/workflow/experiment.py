"""Experiment stage: every (method, density, seed) cell is split, trained and scored."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from qos_prediction.config import Settings
from qos_prediction.models import EvalCell, EvalReport, NeighborTable, QosMatrix, Split
from qos_prediction.predictors import BasePredictor, ProgressHook, create_predictor
from qos_prediction.services.checkpoint import save_checkpoint
from qos_prediction.services.logging import cell_logger, console_kwargs
from qos_prediction.services.metrics import mae_arrays, rmse_arrays
from qos_prediction.utils import slugify

from .common import log_stage_summary, resolve_settings, run_ordered
from .data import ExperimentData, load_experiment_data
from .neighbors import resolve_neighbors
from .reference import reference_records
from .stats import StageMetrics

logger = logging.getLogger(__name__)

REPORT_CSV = "report.csv"
REPORT_JSON = "report.json"


@dataclass(frozen=True)
class CellSpec:
    method: str
    density: float
    seed: int

    @property
    def label(self) -> str:
        return f"{self.method}@d{self.density:g}-s{self.seed}"


def plan_cells(
    methods: Sequence[str], densities: Sequence[float], seeds: Sequence[int]
) -> List[CellSpec]:
    """Cells in canonical report order: method, then density, then seed."""
    return [
        CellSpec(method.lower(), float(density), int(seed))
        for method in methods
        for density in densities
        for seed in seeds
    ]


def evaluate_predictor(predictor: BasePredictor, test: QosMatrix) -> Tuple[float, float]:
    """MAE and RMSE of ``predictor`` over every test entry."""
    predictions = predictor.predict(test.users, test.services)
    return mae_arrays(test.values, predictions), rmse_arrays(test.values, predictions)


def fit_predictor(
    settings: Settings,
    data: ExperimentData,
    method: str,
    data_split: Split,
    *,
    neighbors: Optional[NeighborTable] = None,
    progress_hook: ProgressHook | None = None,
) -> BasePredictor:
    predictor = create_predictor(method, settings)
    regions = None
    if predictor.requires_regions:
        regions = data.region_model(data_split, include_self=settings.region_include_self)
    if predictor.requires_neighbors and neighbors is None:
        neighbors = resolve_neighbors(settings, data_split, fingerprint=data.fingerprint)
    return predictor.fit(
        data_split.train,
        regions=regions,
        neighbors=neighbors,
        progress_hook=progress_hook,
    )


def run_cell(
    settings: Settings,
    data: ExperimentData,
    spec: CellSpec,
    *,
    neighbors: Optional[NeighborTable] = None,
) -> EvalCell:
    """Train and score one cell; failures are captured in the returned cell."""
    log = cell_logger(logger, spec.label)
    cell = EvalCell(
        method=spec.method,
        density=spec.density,
        seed=spec.seed,
        config_fingerprint=settings.config_fingerprint(spec.method),
    )
    start = time.perf_counter()
    try:
        data_split = data.split(spec.density, spec.seed)
        cell.n_train = len(data_split.train)
        cell.n_test = len(data_split.test)
        predictor = fit_predictor(settings, data, spec.method, data_split, neighbors=neighbors)
        cell.mae, cell.rmse = evaluate_predictor(predictor, data_split.test)
        if predictor.last_clamp_count:
            log.info("clamped %d predictions", predictor.last_clamp_count)
    except Exception as exc:  # noqa: BLE001
        cell.status = "failed"
        cell.error = f"{type(exc).__name__}: {exc}"
        log.warning("failed: %s", cell.error, extra=console_kwargs())
        log.debug("traceback", exc_info=True)
    cell.wall_time = time.perf_counter() - start
    if cell.ok:
        log.info("MAE %.4f RMSE %.4f (%.1fs)", cell.mae, cell.rmse, cell.wall_time)
    return cell


def _failed_cell(settings: Settings, spec: CellSpec, exc: Exception) -> EvalCell:
    return EvalCell(
        method=spec.method,
        density=spec.density,
        seed=spec.seed,
        status="failed",
        config_fingerprint=settings.config_fingerprint(spec.method),
        error=f"{type(exc).__name__}: {exc}",
    )


def _neighbor_tables(
    settings: Settings,
    data: ExperimentData,
    cells: Sequence[CellSpec],
) -> Dict[Tuple[float, int], NeighborTable | Exception]:
    """Resolve each split's neighbor table once before cells run concurrently."""
    metrics = StageMetrics()
    tables: Dict[Tuple[float, int], NeighborTable | Exception] = {}
    with metrics.timed():
        for spec in cells:
            key = (spec.density, spec.seed)
            if spec.method != "fiemf" or key in tables:
                continue
            try:
                tables[key] = resolve_neighbors(
                    settings, data.split(*key), fingerprint=data.fingerprint, metrics=metrics
                )
            except Exception as exc:  # noqa: BLE001
                logger.warning("Neighbor stage failed for d=%g seed=%d: %s", key[0], key[1], exc)
                metrics.record_failed()
                tables[key] = exc
    if tables:
        log_stage_summary("neighbors", metrics)
    return tables


def run_cells(
    settings: Settings,
    data: ExperimentData,
    cells: Sequence[CellSpec],
) -> List[EvalCell]:
    tables = _neighbor_tables(settings, data, cells)

    def _worker(spec: CellSpec) -> EvalCell:
        table = tables.get((spec.density, spec.seed))
        if isinstance(table, Exception):
            return _failed_cell(settings, spec, table)
        return run_cell(settings, data, spec, neighbors=table)

    metrics = StageMetrics()
    with metrics.timed():
        results = run_ordered(list(cells), _worker, settings, desc="experiment cells", unit="cell")
    succeeded = sum(1 for cell in results if cell.ok)
    metrics.record_produced(succeeded)
    metrics.record_failed(len(results) - succeeded)
    log_stage_summary("experiment", metrics)
    return results


def report_summary(
    settings: Settings, report: EvalReport, *, fingerprint: str = ""
) -> Dict[str, object]:
    """JSON summary: configuration, cells, seed aggregates and published reference rows."""
    methods = sorted({cell.method for cell in report.cells})
    aggregates = report.aggregates()
    aggregates.insert(len(aggregates.columns), "provenance", "run")
    return {
        "dataset_fingerprint": fingerprint,
        "densities": sorted({cell.density for cell in report.cells}),
        "seeds": sorted({cell.seed for cell in report.cells}),
        "methods": methods,
        "config_fingerprints": {method: settings.config_fingerprint(method) for method in methods},
        "hyperparameters": {method: settings.hyperparams_for(method) for method in methods},
        "cells": [cell.to_dict() for cell in report.cells],
        "aggregates": _records(aggregates),
        "reference": reference_records(),
    }


def _records(frame: pd.DataFrame) -> List[Dict[str, object]]:
    cleaned = frame.astype(object).where(frame.notna(), None)
    return cleaned.to_dict(orient="records")


def write_report(
    settings: Settings,
    report: EvalReport,
    *,
    fingerprint: str = "",
    directory: Optional[Path] = None,
) -> Tuple[Path, Path]:
    directory = directory or settings.output_dir
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / REPORT_CSV
    json_path = directory / REPORT_JSON
    report.to_frame().to_csv(csv_path, index=False, float_format="%.10g")
    summary = report_summary(settings, report, fingerprint=fingerprint)
    json_path.write_text(json.dumps(summary, indent=2, default=_json_default), encoding="utf-8")
    logger.info("Wrote %s and %s", csv_path, json_path, extra=console_kwargs())
    return csv_path, json_path


def _json_default(value: object) -> object:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def load_report(path: Path) -> EvalReport:
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    return EvalReport.from_frame(pd.read_csv(path, float_precision="round_trip"))


def run_experiment(
    settings: Settings | None = None,
    *,
    data: Optional[ExperimentData] = None,
    methods: Optional[Sequence[str]] = None,
    densities: Optional[Sequence[float]] = None,
    seeds: Optional[Sequence[int]] = None,
    write: bool = True,
) -> EvalReport:
    """Evaluate every configured cell and write ``report.csv`` and ``report.json``."""
    settings = resolve_settings(settings)
    data = data or load_experiment_data(settings)
    cells = plan_cells(
        methods or settings.methods,
        densities or settings.densities,
        seeds or settings.seeds,
    )
    logger.info(
        "Running %d experiment cells on dataset %s",
        len(cells),
        data.fingerprint,
        extra=console_kwargs(),
    )
    report = EvalReport(cells=run_cells(settings, data, cells))
    if write:
        write_report(settings, report, fingerprint=data.fingerprint)
    return report


def train_and_checkpoint(
    settings: Settings,
    data: ExperimentData,
    method: str,
    density: float,
    seed: int,
    *,
    progress_hook: ProgressHook | None = None,
) -> Tuple[BasePredictor, EvalCell, Path]:
    """Fit one method on one split, score it and save a checkpoint."""
    spec = CellSpec(method.lower(), float(density), int(seed))
    data_split = data.split(spec.density, spec.seed)
    start = time.perf_counter()
    predictor = fit_predictor(settings, data, spec.method, data_split, progress_hook=progress_hook)
    mae_value, rmse_value = evaluate_predictor(predictor, data_split.test)
    cell = EvalCell(
        method=spec.method,
        density=spec.density,
        seed=spec.seed,
        mae=mae_value,
        rmse=rmse_value,
        n_train=len(data_split.train),
        n_test=len(data_split.test),
        wall_time=time.perf_counter() - start,
        config_fingerprint=settings.config_fingerprint(spec.method),
    )
    name = slugify(f"{spec.method}-{data.fingerprint}-{data_split.slug}")
    path = save_checkpoint(
        predictor,
        settings.output_dir / "checkpoints" / f"{name}.npz",
        fingerprint=data.fingerprint,
    )
    return predictor, cell, path


__all__ = [
    "CellSpec",
    "REPORT_CSV",
    "REPORT_JSON",
    "evaluate_predictor",
    "fit_predictor",
    "load_report",
    "plan_cells",
    "report_summary",
    "run_cell",
    "run_cells",
    "run_experiment",
    "train_and_checkpoint",
    "write_report",
]
