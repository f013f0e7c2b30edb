#!/usr/bin/env python3
"""Run the full evaluation, the alpha/gamma/d sweeps and the comparison table."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

if sys.version_info < (3, 9):
    raise SystemExit("Please run this script with Python 3.9 or newer.")

from dotenv import load_dotenv

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from qos_prediction.config import load_settings
from qos_prediction.workflow.common import configure_logging_for_run
from qos_prediction.workflow.data import load_experiment_data
from qos_prediction.workflow.experiment import run_experiment
from qos_prediction.workflow.report import build_comparison_table, write_comparison
from qos_prediction.workflow.sweep import sweep

# (param, baselines evaluated on the same splits)
SWEEPS = (("gamma", ("pmf",)), ("alpha", ("pmf",)), ("d", ()))


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Reproduce the accuracy comparison and the parameter sweeps on WS-DREAM."
    )
    parser.add_argument("--config", type=Path, default=None, help="Optional YAML settings.")
    parser.add_argument("--rt", type=Path, default=None, help="Path to rtMatrix.txt.")
    parser.add_argument("--users", type=Path, default=None, help="Path to userlist.txt.")
    parser.add_argument(
        "--output-dir",
        type=Path,
        default=Path("results"),
        help="Directory receiving every report (default: results/).",
    )
    parser.add_argument(
        "--seeds",
        type=int,
        nargs="+",
        default=None,
        help="Split seeds (default: the configured seeds).",
    )
    parser.add_argument(
        "--skip-sweeps",
        action="store_true",
        help="Only run the evaluation and the comparison table.",
    )
    return parser.parse_args()


def main() -> None:
    args = parse_args()

    overrides = {"output_dir": args.output_dir.resolve()}
    if args.rt is not None:
        overrides["rt_matrix_path"] = args.rt
    if args.users is not None:
        overrides["user_list_path"] = args.users
    if args.seeds:
        overrides["seeds"] = args.seeds

    settings = load_settings(args.config, overrides=overrides)
    configure_logging_for_run(settings)
    print("Running experiments with settings:")
    print(f"  dataset: {settings.rt_matrix_path}")
    print(f"  methods: {settings.methods}")
    print(f"  densities: {settings.densities}")
    print(f"  seeds: {settings.seeds}")
    print(f"  output_dir: {settings.output_dir}")

    data = load_experiment_data(settings)
    report = run_experiment(settings, data=data)
    if report.failed:
        print(f"{len(report.failed)} cells failed; see {settings.output_dir / 'report.csv'}")

    if not args.skip_sweeps:
        for param, baselines in SWEEPS:
            table = sweep(param, None, settings, data=data, baselines=baselines)
            best = table.best()
            print(f"Sweep {param}: best value {best.value:g} (MAE {best.mae:.4f})")

    comparison = build_comparison_table(report, include_reference=True)
    path = write_comparison(settings, comparison)
    print(f"Comparison table written to {path}")


if __name__ == "__main__":
    load_dotenv()
    main()
