"""Experiment settings: dataset paths, protocol grid, per-method hyperparameters and run switches.

Values are layered as defaults, then environment (``.env`` included), then a
YAML file, then CLI overrides, each layer deep-merged into the one below.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from qos_prediction.models import (
    FiemfHyperparams,
    MFHyperparams,
    SimilarityOptions,
    UipccHyperparams,
)

METHODS = ("umean", "imean", "uipcc", "pmf", "biasedmf", "fiemf")
HYPERPARAM_GROUPS = ("similarity", "fiemf", "pmf", "biasedmf", "uipcc")


class Settings(BaseSettings):
    """Everything one run needs; nested groups read from ``FIEMF__ALPHA``-style variables."""

    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    # directories
    data_root: Path = Field(
        default=Path("./data"),
        description="Root directory for experiment data (splits, logs)",
    )
    cache_root: Path = Field(
        default=Path("./.cache"),
        description="Root directory for cached neighbor tables and similarity matrices",
    )
    output_dir: Path = Field(
        default=Path("./results"),
        description="Directory receiving report.csv, report.json and sweep_<param>.csv",
    )

    # ===== Dataset =====
    rt_matrix_path: Optional[Path] = Field(
        default=None,
        description="Path to the WS-DREAM rtMatrix.txt response-time matrix",
    )
    user_list_path: Optional[Path] = Field(
        default=None,
        description="Path to the WS-DREAM userlist.txt (tab separated)",
    )
    user_id_column: str = Field(
        default="[User ID]",
        description="Header of the user index column in the user list",
    )
    country_column: str = Field(
        default="[Country]",
        description="Header of the country column in the user list",
    )

    # ===== Protocol =====
    densities: List[float] = Field(
        default_factory=lambda: [0.05, 0.10, 0.15, 0.20],
        description="Training densities evaluated by run_experiment",
    )
    seeds: List[int] = Field(
        default_factory=lambda: [1, 2, 3, 4, 5],
        description="Split seeds; metrics are averaged across them",
    )
    methods: List[str] = Field(
        default_factory=lambda: list(METHODS),
        description="Methods evaluated by run_experiment",
    )
    sweep_density: float = Field(
        default=0.10,
        gt=0.0,
        lt=1.0,
        description="Training density used by parameter sweeps",
    )

    # ===== Model hyperparameters =====
    similarity: SimilarityOptions = Field(default_factory=SimilarityOptions)
    region_include_self: bool = Field(
        default=False,
        description="Include the user's own entries in its region mean",
    )
    fiemf: FiemfHyperparams = Field(default_factory=FiemfHyperparams)
    pmf: MFHyperparams = Field(default_factory=MFHyperparams)
    biasedmf: MFHyperparams = Field(default_factory=MFHyperparams)
    uipcc: UipccHyperparams = Field(default_factory=UipccHyperparams)
    clamp_predictions: bool = Field(
        default=True,
        description="Clamp predictions to the training value range before scoring",
    )

    # ===== Parallelism and caching =====
    max_workers: int = Field(
        default=4,
        ge=1,
        description="Maximum number of parallel workers (similarity rows, experiment cells)",
    )
    use_neighbor_cache: bool = Field(
        default=True,
        description="Reuse cached neighbor tables keyed by dataset, split and options",
    )

    # ===== Logging =====
    verbose: bool = Field(default=False, description="Enable debug logging")
    log_to_file: bool = Field(
        default=True,
        description="Persist logs to a file (defaults to <data_root>/logs/experiment.log)",
    )
    log_to_console: bool = Field(
        default=True,
        description="Emit selected logs to the console in addition to the log file",
    )
    log_file: Optional[Path] = Field(
        default=None,
        description="Optional override for log file path",
    )
    show_progress: bool = Field(
        default=True,
        description="Show tqdm progress bars on the console",
    )

    @field_validator("densities")
    @classmethod
    def _check_densities(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one density is required")
        for density in value:
            if not 0.0 < density < 1.0:
                raise ValueError(f"density {density} is outside (0, 1)")
        return value

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one seed is required")
        return value

    @field_validator("methods")
    @classmethod
    def _check_methods(cls, value: List[str]) -> List[str]:
        normalized = [method.strip().lower() for method in value]
        if not normalized:
            raise ValueError("at least one method is required")
        unknown = [method for method in normalized if method not in METHODS]
        if unknown:
            raise ValueError(
                f"unknown method(s) {', '.join(unknown)}; expected one of {', '.join(METHODS)}"
            )
        return normalized

    def merge_overrides(self, overrides: Optional[Mapping[str, Any]]) -> Settings:
        """
        Return a new, re-validated Settings with ``overrides`` deep-merged in.

        Nested groups (``fiemf``, ``similarity`` ...) may be overridden one key
        at a time.
        """
        if not overrides:
            return self
        payload = _deep_merge(self.model_dump(), dict(overrides))
        return type(self).model_validate(payload)

    def ensure_directories(self) -> None:
        for directory in (self.data_root, self.cache_root, self.output_dir):
            directory.mkdir(parents=True, exist_ok=True)

    def resolved_log_file(self) -> Path:
        return self.log_file or self.data_root / "logs" / "experiment.log"

    def require_dataset_paths(self) -> tuple[Path, Path]:
        if self.rt_matrix_path is None or self.user_list_path is None:
            raise ValueError("rt_matrix_path and user_list_path must both be configured")
        return self.rt_matrix_path, self.user_list_path

    def hyperparams_for(self, method: str) -> Dict[str, Any]:
        """Hyperparameter payload that determines ``method``'s results."""
        method = method.lower()
        payload: Dict[str, Any] = {"clamp_predictions": self.clamp_predictions}
        if method == "fiemf":
            payload["fiemf"] = self.fiemf.to_dict()
            payload["similarity"] = self.similarity.to_dict()
            payload["region_include_self"] = self.region_include_self
        elif method in ("pmf", "biasedmf"):
            payload[method] = getattr(self, method).to_dict()
        elif method == "uipcc":
            payload["uipcc"] = self.uipcc.to_dict()
        return payload

    def config_fingerprint(self, method: str) -> str:
        blob = json.dumps(
            {"method": method.lower(), **self.hyperparams_for(method)},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _canonical_keys(group: str, values: Mapping[str, Any]) -> Dict[str, Any]:
    """Map alias keys (``lambda``, ``d``, ``k``) of a hyperparameter group to field names."""
    annotation = Settings.model_fields[group].annotation
    aliases: Dict[str, str] = {}
    for name, info in annotation.model_fields.items():
        choices = getattr(info.validation_alias, "choices", ())
        for choice in choices:
            aliases[str(choice)] = name
    return {aliases.get(key, key): value for key, value in values.items()}


def _deep_merge(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        current = merged.get(key)
        if isinstance(current, dict) and isinstance(value, Mapping):
            if key in HYPERPARAM_GROUPS:
                value = _canonical_keys(key, value)
            merged[key] = _deep_merge(current, value)
        else:
            merged[key] = value
    return merged


def read_settings_yaml(yaml_path: Path) -> Dict[str, Any]:
    """The mapping stored in ``yaml_path``; an empty file reads as ``{}``."""
    if not yaml_path.exists():
        raise FileNotFoundError(f"Settings file not found: {yaml_path}")
    payload = yaml.safe_load(yaml_path.read_text(encoding="utf-8")) or {}
    if not isinstance(payload, dict):
        raise ValueError(f"{yaml_path}: expected a mapping of settings at the top level")
    return payload


def load_settings(
    yaml_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Settings:
    """Settings from the environment, then ``yaml_path``, then ``overrides``.

    ``overrides`` usually carries CLI options such as ``{"output_dir": ...}`` or
    ``{"fiemf": {"alpha": 0.2}}``. The run directories exist afterwards.
    """
    settings = Settings()
    if yaml_path is not None:
        settings = settings.merge_overrides(read_settings_yaml(yaml_path))
    settings = settings.merge_overrides(overrides)
    settings.ensure_directories()
    return settings


__all__ = ["METHODS", "Settings", "load_settings", "read_settings_yaml"]
