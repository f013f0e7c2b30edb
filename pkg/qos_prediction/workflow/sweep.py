"""Parameter sweeps over FIEMF's alpha, gamma and latent dimension."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qos_prediction.config import Settings
from qos_prediction.models import EvalCell, SweepRow, SweepTable

from .common import log_stage_summary, resolve_settings, run_ordered
from .data import ExperimentData, load_experiment_data
from .experiment import CellSpec, run_cell
from .neighbors import resolve_neighbors
from .stats import StageMetrics

logger = logging.getLogger(__name__)

# sweep name -> FiemfHyperparams field
SWEEP_FIELDS: Dict[str, str] = {"alpha": "alpha", "gamma": "gamma", "d": "dim"}
_SWEEP_ALIASES = {"α": "alpha", "γ": "gamma", "dim": "d"}

DEFAULT_SWEEP_VALUES: Dict[str, Tuple[float, ...]] = {
    "alpha": tuple(round(0.1 * step, 1) for step in range(11)),
    "gamma": (0.0, 5.0, 10.0, 18.0, 30.0, 50.0, 75.0, 100.0),
    "d": (1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20),
}


def normalize_param(param: str) -> str:
    key = param.strip().lower()
    key = _SWEEP_ALIASES.get(key, key)
    if key not in SWEEP_FIELDS:
        raise ValueError(f"unknown sweep parameter {param!r}; expected alpha, gamma or d")
    return key


def sweep_values(param: str, values: Optional[Sequence[float]] = None) -> List[float]:
    """Sorted, de-duplicated values; alpha always includes both endpoints."""
    param = normalize_param(param)
    chosen = list(values) if values else list(DEFAULT_SWEEP_VALUES[param])
    if param == "alpha":
        chosen.extend([0.0, 1.0])
    if param == "d":
        for value in chosen:
            if float(value) != int(value):
                raise ValueError(f"latent dimension must be an integer, got {value}")
        return sorted({int(value) for value in chosen})
    return sorted({float(value) for value in chosen})


def _variant(settings: Settings, param: str, value: float) -> Settings:
    field = SWEEP_FIELDS[param]
    # re-validates the value through FiemfHyperparams
    return settings.merge_overrides({"fiemf": {field: value}})


def _aggregate(
    param: str, value: float, cells: Sequence[EvalCell], *, kind: str, method: str
) -> SweepRow:
    ok = [cell for cell in cells if cell.ok]
    if not ok:
        logger.warning("All cells failed for %s=%s (%s)", param, value, method)
        return SweepRow(
            param=param,
            value=value,
            mae=float("nan"),
            rmse=float("nan"),
            mae_std=float("nan"),
            rmse_std=float("nan"),
            n_seeds=0,
            kind=kind,
            method=method,
        )
    mae_values = np.array([cell.mae for cell in ok], dtype=np.float64)
    rmse_values = np.array([cell.rmse for cell in ok], dtype=np.float64)
    return SweepRow(
        param=param,
        value=value,
        mae=float(mae_values.mean()),
        rmse=float(rmse_values.mean()),
        mae_std=float(mae_values.std()),
        rmse_std=float(rmse_values.std()),
        n_seeds=len(ok),
        kind=kind,
        method=method,
    )


def sweep(
    param: str,
    values: Optional[Sequence[float]] = None,
    settings: Settings | None = None,
    *,
    data: Optional[ExperimentData] = None,
    density: Optional[float] = None,
    seeds: Optional[Sequence[int]] = None,
    baselines: Sequence[str] = (),
    write: bool = True,
) -> SweepTable:
    """Re-train FIEMF for each value on shared splits and neighbor tables.

    ``baselines`` names reference methods evaluated once on the same splits
    and emitted as ``kind="baseline"`` rows.
    """
    settings = resolve_settings(settings)
    param = normalize_param(param)
    grid = sweep_values(param, values)
    variants = [_variant(settings, param, value) for value in grid]
    density = float(density if density is not None else settings.sweep_density)
    seeds = list(seeds or settings.seeds)
    data = data or load_experiment_data(settings)

    metrics = StageMetrics()
    with metrics.timed():
        tables = {
            seed: resolve_neighbors(
                settings, data.split(density, seed), fingerprint=data.fingerprint, metrics=metrics
            )
            for seed in seeds
        }
    log_stage_summary(f"sweep {param} neighbors", metrics)

    work: List[Tuple[Settings, CellSpec]] = [
        (variant, CellSpec("fiemf", density, seed)) for variant in variants for seed in seeds
    ]
    work.extend(
        (settings, CellSpec(method.lower(), density, seed))
        for method in baselines
        for seed in seeds
    )

    def _worker(item: Tuple[Settings, CellSpec]) -> EvalCell:
        cell_settings, spec = item
        table = tables[spec.seed] if spec.method == "fiemf" else None
        return run_cell(cell_settings, data, spec, neighbors=table)

    cells = run_ordered(work, _worker, settings, desc=f"sweep {param}", unit="cell")

    per_seed = len(seeds)
    rows = [
        _aggregate(
            param,
            value,
            cells[position * per_seed : (position + 1) * per_seed],
            kind="sweep",
            method="fiemf",
        )
        for position, value in enumerate(grid)
    ]
    offset = len(grid) * per_seed
    for position, method in enumerate(baselines):
        start = offset + position * per_seed
        rows.append(
            _aggregate(
                param,
                float("nan"),
                cells[start : start + per_seed],
                kind="baseline",
                method=method.lower(),
            )
        )

    table = SweepTable(param=param, density=density, rows=rows)
    logger.info("Sweep %s at density %g: best value %s", param, density, _best_value(table))
    if write:
        write_sweep(settings, table)
    return table


def _best_value(table: SweepTable) -> Optional[float]:
    try:
        return table.best().value
    except ValueError:
        return None


def write_sweep(settings: Settings, table: SweepTable, directory: Optional[Path] = None) -> Path:
    directory = directory or settings.output_dir
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"sweep_{table.param}.csv"
    table.to_frame().to_csv(path, index=False, float_format="%.10g")
    logger.info("Wrote %s", path)
    return path


__all__ = [
    "DEFAULT_SWEEP_VALUES",
    "SWEEP_FIELDS",
    "normalize_param",
    "sweep",
    "sweep_values",
    "write_sweep",
]
