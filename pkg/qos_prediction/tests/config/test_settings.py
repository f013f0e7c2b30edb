from __future__ import annotations

import textwrap
from pathlib import Path

import pytest
from pydantic import ValidationError

from qos_prediction.config import METHODS, Settings, load_settings, read_settings_yaml


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    for name in ("FIEMF__ALPHA", "FIEMF__GAMMA", "MAX_WORKERS", "SEEDS"):
        monkeypatch.delenv(name, raising=False)


def test_defaults() -> None:
    settings = Settings()

    assert settings.densities == [0.05, 0.10, 0.15, 0.20]
    assert settings.seeds == [1, 2, 3, 4, 5]
    assert settings.methods == list(METHODS)
    assert settings.fiemf.alpha == 0.15
    assert settings.fiemf.lam == 18.0
    assert settings.fiemf.gamma == 18.0
    assert settings.fiemf.dim == 10
    assert settings.fiemf.neighbors == 10
    assert settings.similarity.r_med_mode == "user"
    assert settings.similarity.min_corated == 2
    assert settings.clamp_predictions is True
    assert settings.resolved_log_file() == Path("./data") / "logs" / "experiment.log"


def test_load_settings_reads_yaml_with_aliases(tmp_path: Path) -> None:
    config_path = tmp_path / "experiment.yaml"
    config_path.write_text(
        textwrap.dedent(
            f"""
            output_dir: {tmp_path / "out"}
            densities: [0.1]
            seeds: [7]
            methods: [PMF, fiemf]
            fiemf:
              lambda: 5.0
              d: 4
              k: 6
            pmf:
              lambda: 0.3
            """
        ),
        encoding="utf-8",
    )

    settings = load_settings(yaml_path=config_path)

    assert settings.output_dir == tmp_path / "out"
    assert settings.output_dir.is_dir()
    assert settings.densities == [0.1]
    assert settings.seeds == [7]
    assert settings.methods == ["pmf", "fiemf"]
    assert settings.fiemf.lam == 5.0
    assert settings.fiemf.dim == 4
    assert settings.fiemf.neighbors == 6
    assert settings.fiemf.alpha == 0.15
    assert settings.pmf.lam == 0.3


def test_environment_is_below_yaml_and_overrides(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setenv("FIEMF__ALPHA", "0.3")
    monkeypatch.setenv("FIEMF__GAMMA", "7")
    assert Settings().fiemf.alpha == 0.3

    config_path = tmp_path / "alpha.yaml"
    config_path.write_text("fiemf:\n  alpha: 0.6\n", encoding="utf-8")
    from_yaml = load_settings(yaml_path=config_path)
    assert from_yaml.fiemf.alpha == 0.6
    assert from_yaml.fiemf.gamma == 7.0

    overridden = load_settings(yaml_path=config_path, overrides={"fiemf": {"alpha": 0.9}})
    assert overridden.fiemf.alpha == 0.9


@pytest.mark.parametrize(
    "overrides",
    [
        {"densities": [0.0]},
        {"densities": [1.0]},
        {"densities": []},
        {"seeds": []},
        {"methods": ["svd"]},
        {"fiemf": {"alpha": 1.5}},
        {"fiemf": {"dim": 0}},
        {"fiemf": {"neighbors": 0}},
        {"fiemf": {"lam": -1.0}},
        {"similarity": {"r_med_mode": "median"}},
        {"max_workers": 0},
        {"fiemf": {"unknown": 1}},
    ],
)
def test_invalid_values_are_rejected(overrides: dict) -> None:
    with pytest.raises(ValidationError):
        load_settings(overrides=overrides)


def test_missing_yaml_file_raises(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        load_settings(yaml_path=tmp_path / "missing.yaml")


def test_yaml_root_must_be_mapping(tmp_path: Path) -> None:
    config_path = tmp_path / "list.yaml"
    config_path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="mapping"):
        load_settings(yaml_path=config_path)


def test_empty_yaml_reads_as_defaults(tmp_path: Path) -> None:
    config_path = tmp_path / "empty.yaml"
    config_path.write_text("", encoding="utf-8")
    assert read_settings_yaml(config_path) == {}
    assert load_settings(yaml_path=config_path).fiemf.alpha == Settings().fiemf.alpha


def test_require_dataset_paths() -> None:
    with pytest.raises(ValueError):
        Settings().require_dataset_paths()
    settings = Settings(rt_matrix_path=Path("rt.txt"), user_list_path=Path("users.txt"))
    assert settings.require_dataset_paths() == (Path("rt.txt"), Path("users.txt"))


def test_config_fingerprint_tracks_relevant_fields() -> None:
    base = Settings()
    changed_alpha = base.merge_overrides({"fiemf": {"alpha": 0.2}})
    changed_similarity = base.merge_overrides({"similarity": {"r_med_mode": "global"}})

    assert base.config_fingerprint("fiemf") == Settings().config_fingerprint("fiemf")
    assert base.config_fingerprint("fiemf") != changed_alpha.config_fingerprint("fiemf")
    assert base.config_fingerprint("fiemf") != changed_similarity.config_fingerprint("fiemf")
    assert base.config_fingerprint("pmf") == changed_alpha.config_fingerprint("pmf")
    assert base.config_fingerprint("umean") != base.config_fingerprint("imean")


def test_hyperparams_for_method_groups() -> None:
    settings = Settings()
    assert set(settings.hyperparams_for("fiemf")) == {
        "clamp_predictions",
        "fiemf",
        "similarity",
        "region_include_self",
    }
    assert set(settings.hyperparams_for("biasedmf")) == {"clamp_predictions", "biasedmf"}
    assert set(settings.hyperparams_for("umean")) == {"clamp_predictions"}
