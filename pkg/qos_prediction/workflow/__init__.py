"""Pipeline step entry points for QoS prediction experiments."""

from .data import ExperimentData, load_experiment_data, prepare_dataset
from .experiment import run_experiment
from .report import build_comparison_table
from .sweep import sweep

__all__ = [
    "ExperimentData",
    "build_comparison_table",
    "load_experiment_data",
    "prepare_dataset",
    "run_experiment",
    "sweep",
]
