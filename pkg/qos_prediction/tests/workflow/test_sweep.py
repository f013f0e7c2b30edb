from __future__ import annotations

import math

import pandas as pd
import pytest

from qos_prediction.config import Settings
from qos_prediction.workflow.data import load_experiment_data
from qos_prediction.workflow.sweep import normalize_param, sweep, sweep_values


@pytest.mark.parametrize(
    ("raw", "expected"),
    [("alpha", "alpha"), ("α", "alpha"), ("Gamma", "gamma"), ("γ", "gamma"), ("dim", "d")],
)
def test_normalize_param(raw: str, expected: str) -> None:
    assert normalize_param(raw) == expected


def test_unknown_param_is_rejected() -> None:
    with pytest.raises(ValueError):
        normalize_param("lambda")


def test_alpha_grid_always_has_endpoints() -> None:
    assert sweep_values("alpha", [0.3, 0.15, 0.3]) == [0.0, 0.15, 0.3, 1.0]
    assert sweep_values("alpha")[0] == 0.0
    assert sweep_values("alpha")[-1] == 1.0


def test_dimension_grid_must_be_integral() -> None:
    assert sweep_values("d", [4.0, 2, 4]) == [2, 4]
    with pytest.raises(ValueError):
        sweep_values("d", [2.5])


def test_sweep_alpha_with_baseline(toy_settings: Settings) -> None:
    table = sweep(
        "alpha",
        [0.5],
        toy_settings,
        density=0.5,
        seeds=[1],
        baselines=["PMF"],
    )

    assert table.param == "alpha"
    assert table.density == 0.5
    assert [row.value for row in table.sweep_rows()] == [0.0, 0.5, 1.0]
    assert all(row.n_seeds == 1 for row in table.rows)
    [baseline] = [row for row in table.rows if row.kind == "baseline"]
    assert baseline.method == "pmf"
    assert math.isnan(baseline.value)
    assert table.best().value in (0.0, 0.5, 1.0)

    frame = pd.read_csv(toy_settings.output_dir / "sweep_alpha.csv")
    assert frame["kind"].tolist() == ["sweep", "sweep", "sweep", "baseline"]
    assert frame["value"].isna().tolist() == [False, False, False, True]
    assert (frame["mae"] <= frame["rmse"]).all()


def test_sweep_dimension_shares_splits(toy_settings: Settings) -> None:
    data = load_experiment_data(toy_settings)
    table = sweep("d", [1, 2], toy_settings, data=data, write=False)

    assert [row.value for row in table.rows] == [1, 2]
    assert all(row.n_seeds == len(toy_settings.seeds) for row in table.rows)
    assert not (toy_settings.output_dir / "sweep_d.csv").exists()


def test_sweep_rejects_out_of_range_alpha(toy_settings: Settings) -> None:
    with pytest.raises(ValueError):
        sweep("alpha", [1.5], toy_settings, write=False)
