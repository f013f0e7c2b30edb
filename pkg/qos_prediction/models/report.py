"""Experiment result models."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import pandas as pd

CELL_COLUMNS = [
    "method",
    "density",
    "seed",
    "status",
    "mae",
    "rmse",
    "n_train",
    "n_test",
    "wall_time",
    "config_fingerprint",
    "provenance",
    "error",
]


@dataclass
class EvalCell:
    """Metrics of one (method, density, seed) experiment cell."""

    method: str
    density: float
    seed: int
    status: str = "ok"
    mae: Optional[float] = None
    rmse: Optional[float] = None
    n_train: int = 0
    n_test: int = 0
    wall_time: float = 0.0
    config_fingerprint: str = ""
    provenance: str = "run"
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "EvalCell":
        def _optional_float(value: Any) -> Optional[float]:
            if value is None or (isinstance(value, float) and pd.isna(value)):
                return None
            return float(value)

        error = payload.get("error")
        return cls(
            method=str(payload["method"]),
            density=float(payload["density"]),
            seed=int(payload["seed"]),
            status=str(payload.get("status", "ok")),
            mae=_optional_float(payload.get("mae")),
            rmse=_optional_float(payload.get("rmse")),
            n_train=int(payload.get("n_train", 0) or 0),
            n_test=int(payload.get("n_test", 0) or 0),
            wall_time=float(payload.get("wall_time", 0.0) or 0.0),
            config_fingerprint=str(payload.get("config_fingerprint", "") or ""),
            provenance=str(payload.get("provenance", "run") or "run"),
            error=None if error is None or pd.isna(error) else str(error),
        )


@dataclass
class EvalReport:
    """All cells of an experiment; aggregates are computed on demand."""

    cells: List[EvalCell] = field(default_factory=list)

    def add(self, cell: EvalCell) -> None:
        self.cells.append(cell)

    def extend(self, cells: List[EvalCell]) -> None:
        self.cells.extend(cells)

    @property
    def failed(self) -> List[EvalCell]:
        return [cell for cell in self.cells if not cell.ok]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([cell.to_dict() for cell in self.cells], columns=CELL_COLUMNS)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "EvalReport":
        return cls(cells=[EvalCell.from_dict(row) for row in frame.to_dict(orient="records")])

    def aggregates(self) -> pd.DataFrame:
        """Mean and population standard deviation across seeds per (method, density)."""
        ok_cells = [cell.to_dict() for cell in self.cells if cell.ok]
        columns = ["method", "density", "mae_mean", "mae_std", "rmse_mean", "rmse_std", "n_seeds"]
        if not ok_cells:
            return pd.DataFrame(columns=columns)
        frame = pd.DataFrame(ok_cells)
        grouped = frame.groupby(["method", "density"], sort=True)
        result = grouped.agg(
            mae_mean=("mae", "mean"),
            mae_std=("mae", lambda s: float(s.std(ddof=0))),
            rmse_mean=("rmse", "mean"),
            rmse_std=("rmse", lambda s: float(s.std(ddof=0))),
            n_seeds=("seed", "nunique"),
        ).reset_index()
        return result[columns]


@dataclass
class SweepRow:
    param: str
    value: float
    mae: float
    rmse: float
    mae_std: float = 0.0
    rmse_std: float = 0.0
    n_seeds: int = 1
    kind: str = "sweep"
    method: str = "fiemf"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SweepTable:
    param: str
    density: float
    rows: List[SweepRow] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        columns = [
            "param",
            "value",
            "mae",
            "rmse",
            "mae_std",
            "rmse_std",
            "n_seeds",
            "kind",
            "method",
        ]
        frame = pd.DataFrame([row.to_dict() for row in self.rows], columns=columns)
        frame.insert(1, "density", self.density)
        return frame

    def sweep_rows(self) -> List[SweepRow]:
        return [row for row in self.rows if row.kind == "sweep"]

    def best(self) -> SweepRow:
        rows = [row for row in self.sweep_rows() if row.n_seeds > 0]
        if not rows:
            raise ValueError("sweep table has no sweep rows")
        return min(rows, key=lambda row: (row.mae, row.value))


__all__ = ["CELL_COLUMNS", "EvalCell", "EvalReport", "SweepRow", "SweepTable"]
