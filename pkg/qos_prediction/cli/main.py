"""
Command line interface for QoS prediction experiments.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import typer

from qos_prediction.config import Settings, load_settings
from qos_prediction.utils.progress import epoch_progress, progress_callback
from qos_prediction.workflow.common import configure_logging_for_run
from qos_prediction.workflow.data import ExperimentData, prepare_dataset, write_split
from qos_prediction.workflow.experiment import (
    REPORT_CSV,
    load_report,
    run_experiment,
    train_and_checkpoint,
)
from qos_prediction.workflow.neighbors import (
    neighbor_cache_key,
    resolve_neighbors,
    write_neighbors,
)
from qos_prediction.workflow.report import build_comparison_table, write_comparison
from qos_prediction.workflow.sweep import sweep as run_sweep

app = typer.Typer(
    name="fiemf",
    help="FIEMF web-service QoS prediction: data preparation, training, evaluation and sweeps.",
    no_args_is_help=True,
)


@contextmanager
def _domain_errors() -> Iterator[None]:
    """Turn domain failures into a one-line diagnostic and exit code 1."""
    try:
        yield
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        message = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        typer.echo(f"error: {message}", err=True)
        raise typer.Exit(code=1) from None


@app.callback()
def main_options(
    ctx: typer.Context,
    config_path: Optional[Path] = typer.Option(
        None,
        "--config",
        "-c",
        exists=False,
        help="Optional YAML settings override.",
    ),
    output_dir: Optional[Path] = typer.Option(
        None,
        "--output-dir",
        "-o",
        help="Directory receiving reports, sweeps and checkpoints.",
    ),
    seed: Optional[int] = typer.Option(
        None,
        "--seed",
        help="Split seed used by every command (overrides the configured seeds).",
    ),
) -> None:
    """Global options shared by every subcommand."""
    ctx.obj = {"config_path": config_path, "output_dir": output_dir, "seed": seed}


def _settings(ctx: typer.Context, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    options = ctx.obj or {}
    merged: Dict[str, Any] = {}
    if options.get("output_dir") is not None:
        merged["output_dir"] = options["output_dir"]
    if options.get("seed") is not None:
        merged["seeds"] = [options["seed"]]
    merged.update(overrides or {})
    settings = load_settings(options.get("config_path"), overrides=merged or None)
    configure_logging_for_run(settings)
    return settings


def _dataset_overrides(rt_path: Optional[Path], user_path: Optional[Path]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if rt_path is not None:
        overrides["rt_matrix_path"] = rt_path
    if user_path is not None:
        overrides["user_list_path"] = user_path
    return overrides


def _split_list(values: Optional[List[str]]) -> List[str]:
    items: List[str] = []
    for value in values or []:
        items.extend(part.strip() for part in value.split(",") if part.strip())
    return items


def _load(settings: Settings) -> ExperimentData:
    data, _ = prepare_dataset(settings)
    return data


def _seed(settings: Settings, seed: Optional[int]) -> int:
    return seed if seed is not None else settings.seeds[0]


def _density(settings: Settings, density: Optional[float]) -> float:
    return density if density is not None else settings.densities[0]


_FACTOR_METHODS = ("fiemf", "pmf", "biasedmf")
RT_OPTION = typer.Option(None, "--rt", help="Path to rtMatrix.txt.")
USERS_OPTION = typer.Option(None, "--users", help="Path to userlist.txt.")


@app.command()
def prepare(
    ctx: typer.Context,
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Validate the dataset files and print their statistics."""
    with _domain_errors():
        settings = _settings(ctx, _dataset_overrides(rt_path, user_path))
        data, summary = prepare_dataset(settings)
    typer.echo(summary.headline())
    typer.echo(
        f"density {summary.density:.4f}, values {summary.value_min:g}..{summary.value_max:g}, "
        f"{summary.num_regions} regions, fingerprint {data.fingerprint}"
    )


@app.command()
def split(
    ctx: typer.Context,
    density: Optional[float] = typer.Option(None, "--density", help="Training density."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Split seed."),
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Draw one train/test split and export it as triplet CSVs."""
    with _domain_errors():
        settings = _settings(ctx, _dataset_overrides(rt_path, user_path))
        data = _load(settings)
        directory = write_split(settings, data, _density(settings, density), _seed(settings, seed))
    typer.echo(f"Split written to {directory}")


@app.command()
def neighbors(
    ctx: typer.Context,
    density: Optional[float] = typer.Option(None, "--density", help="Training density."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Split seed."),
    k: Optional[int] = typer.Option(None, "--k", help="Neighbors per user (default: fiemf K)."),
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Compute (or load from cache) the Top-K fuzzy-entropy neighbor table of a split."""
    with _domain_errors():
        settings = _settings(ctx, _dataset_overrides(rt_path, user_path))
        data = _load(settings)
        data_split = data.split(_density(settings, density), _seed(settings, seed))
        neighbors_k = k if k is not None else settings.fiemf.neighbors
        table = resolve_neighbors(
            settings, data_split, fingerprint=data.fingerprint, neighbors=neighbors_k
        )
        key = neighbor_cache_key(data.fingerprint, data_split, settings.similarity, neighbors_k)
        path = write_neighbors(settings, table, key)
    typer.echo(f"Neighbor table for {table.num_users} users written to {path}")


@app.command()
def train(
    ctx: typer.Context,
    method: str = typer.Option("fiemf", "--method", "-m", help="Method to train."),
    density: Optional[float] = typer.Option(None, "--density", help="Training density."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Split seed."),
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Train one method on one split, score it and save a checkpoint."""
    with _domain_errors():
        settings = _settings(ctx, _dataset_overrides(rt_path, user_path))
        data = _load(settings)
        key = method.strip().lower()
        iterations = getattr(settings, key).max_iters if key in _FACTOR_METHODS else 0
        progress = epoch_progress(iterations, key, enabled=settings.show_progress)
        try:
            _, cell, path = train_and_checkpoint(
                settings,
                data,
                method,
                _density(settings, density),
                _seed(settings, seed),
                progress_hook=progress_callback(progress),
            )
        finally:
            if progress is not None:
                progress.close()
    typer.echo(f"{cell.method}: MAE {cell.mae:.4f} RMSE {cell.rmse:.4f} ({cell.wall_time:.1f}s)")
    typer.echo(f"Checkpoint saved to {path}")


@app.command()
def evaluate(
    ctx: typer.Context,
    methods: Optional[List[str]] = typer.Option(
        None, "--methods", help="Methods to evaluate (repeatable or comma separated)."
    ),
    densities: Optional[List[float]] = typer.Option(
        None, "--density", help="Training density (repeatable)."
    ),
    seeds: Optional[List[int]] = typer.Option(None, "--seed", help="Split seed (repeatable)."),
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Run the evaluation protocol and write report.csv and report.json."""
    overrides = _dataset_overrides(rt_path, user_path)
    method_list = _split_list(methods)
    if method_list:
        overrides["methods"] = method_list
    if densities:
        overrides["densities"] = list(densities)
    if seeds:
        overrides["seeds"] = list(seeds)
    with _domain_errors():
        settings = _settings(ctx, overrides)
        report = run_experiment(settings)
    failed = len(report.failed)
    typer.echo(
        f"Evaluated {len(report.cells)} cells ({failed} failed); "
        f"report written to {settings.output_dir / REPORT_CSV}"
    )
    for row in report.aggregates().itertuples(index=False):
        typer.echo(
            f"  {row.method:<9} D={row.density:g}: MAE {row.mae_mean:.4f}±{row.mae_std:.4f} "
            f"RMSE {row.rmse_mean:.4f}±{row.rmse_std:.4f} ({row.n_seeds} seeds)"
        )
    if failed:
        typer.echo(f"error: {failed} cells failed; see the error column of the report", err=True)
        raise typer.Exit(code=1)


@app.command()
def sweep(
    ctx: typer.Context,
    param: str = typer.Option(..., "--param", "-p", help="alpha, gamma or d."),
    values: Optional[List[str]] = typer.Option(
        None, "--values", help="Values to try (repeatable or comma separated)."
    ),
    density: Optional[float] = typer.Option(None, "--density", help="Training density."),
    baselines: Optional[List[str]] = typer.Option(
        None, "--baseline", help="Reference method evaluated on the same splits."
    ),
    rt_path: Optional[Path] = RT_OPTION,
    user_path: Optional[Path] = USERS_OPTION,
) -> None:
    """Re-train FIEMF over a parameter grid and write sweep_<param>.csv."""
    with _domain_errors():
        settings = _settings(ctx, _dataset_overrides(rt_path, user_path))
        grid = [float(value) for value in _split_list(values)] or None
        table = run_sweep(
            param,
            grid,
            settings,
            density=density,
            baselines=_split_list(baselines),
        )
    for row in table.rows:
        label = f"{row.param}={row.value:g}" if row.kind == "sweep" else row.method
        typer.echo(f"  {label:<14} MAE {row.mae:.4f} RMSE {row.rmse:.4f}")
    typer.echo(f"Sweep written to {settings.output_dir / f'sweep_{table.param}.csv'}")


@app.command()
def report(
    ctx: typer.Context,
    report_path: Optional[Path] = typer.Option(
        None, "--report", "-r", help="report.csv to summarize (default: <output-dir>/report.csv)."
    ),
    with_reference: bool = typer.Option(
        True,
        "--with-reference/--no-reference",
        help="Append the published reference rows.",
    ),
) -> None:
    """Merge report cells into the comparison table layout."""
    with _domain_errors():
        settings = _settings(ctx)
        source = report_path or settings.output_dir / REPORT_CSV
        table = build_comparison_table(load_report(source), include_reference=with_reference)
        path = write_comparison(settings, table)
    typer.echo(table.to_string(index=False, float_format=lambda value: f"{value:.4f}"))
    typer.echo(f"Comparison written to {path}")


def main() -> None:
    """Main entry point for CLI."""
    app()


if __name__ == "__main__":
    main()
