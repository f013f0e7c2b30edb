import os
from pathlib import Path

from dotenv import load_dotenv
import numpy as np
import pytest

from qos_prediction.config import Settings
from qos_prediction.models import QosMatrix, UserRegionTable

TOY_USERS = 8
TOY_SERVICES = 10
TOY_COUNTRIES = [
    "China",
    "China",
    "United States",
    "United States",
    "Germany",
    "Germany",
    "China",
    "Japan",
]


def make_toy_matrix(seed: int = 7, fill: float = 0.8) -> QosMatrix:
    """Dense-ish random response times in (0.05, 3) with a structured user/service effect."""
    rng = np.random.default_rng(seed)
    user_speed = rng.uniform(0.5, 1.5, size=TOY_USERS)
    service_cost = rng.uniform(0.1, 1.5, size=TOY_SERVICES)
    noise = rng.uniform(0.0, 0.3, size=(TOY_USERS, TOY_SERVICES))
    values = np.outer(user_speed, service_cost) + noise
    observed = rng.random((TOY_USERS, TOY_SERVICES)) < fill
    # every user and service keeps at least two observations
    observed[:, :2] = True
    observed[:2, :] = True
    users, services = np.nonzero(observed)
    return QosMatrix.from_triplets(
        TOY_USERS, TOY_SERVICES, users, services, np.round(values[users, services] + 0.05, 3)
    )


def write_toy_files(directory: Path, matrix: QosMatrix) -> tuple[Path, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    rt_path = directory / "rtMatrix.txt"
    dense = matrix.to_dense(fill_value=-1.0)
    rt_path.write_text(
        "\n".join(" ".join(repr(float(value)) for value in row) for row in dense) + "\n",
        encoding="utf-8",
    )
    user_path = directory / "userlist.txt"
    lines = [
        "[User ID]\t[IP Address]\t[Country]\t[IP No.]\t[AS]\t[Latitude]\t[Longitude]",
        "=" * 60,
    ]
    for user, country in enumerate(TOY_COUNTRIES):
        lines.append(f"{user}\t10.0.0.{user}\t{country}\t{user}\tAS{user}\t0.0\t0.0")
    user_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rt_path, user_path


@pytest.fixture
def toy_matrix() -> QosMatrix:
    return make_toy_matrix()


@pytest.fixture
def toy_regions() -> UserRegionTable:
    return UserRegionTable.from_mapping(dict(enumerate(TOY_COUNTRIES)))


@pytest.fixture
def toy_files(tmp_path: Path, toy_matrix: QosMatrix) -> tuple[Path, Path]:
    return write_toy_files(tmp_path / "dataset", toy_matrix)


@pytest.fixture
def toy_settings(tmp_path: Path, toy_files: tuple[Path, Path]) -> Settings:
    rt_path, user_path = toy_files
    small = {"dim": 3, "max_iters": 15, "learning_rate": 0.02}
    return Settings(
        data_root=tmp_path / "data",
        cache_root=tmp_path / "cache",
        output_dir=tmp_path / "results",
        rt_matrix_path=rt_path,
        user_list_path=user_path,
        densities=[0.5],
        seeds=[1, 2],
        sweep_density=0.5,
        max_workers=1,
        show_progress=False,
        log_to_file=False,
        log_to_console=False,
        fiemf={"alpha": 0.5, "lam": 0.1, "gamma": 0.5, "neighbors": 3, **small},
        pmf={"lam": 0.1, **small},
        biasedmf={"lam": 0.1, **small},
        uipcc={"top_k": 3},
    )


@pytest.fixture(scope="session")
def wsdream_root() -> Path:
    """Directory holding the full WS-DREAM rtMatrix.txt and userlist.txt, or skip."""
    load_dotenv()
    root = os.getenv("WSDREAM_ROOT")
    if not root:
        pytest.skip("WSDREAM_ROOT not configured")
    path = Path(root)
    if not (path / "rtMatrix.txt").exists() or not (path / "userlist.txt").exists():
        pytest.skip(f"WS-DREAM files not found under {path}")
    return path
