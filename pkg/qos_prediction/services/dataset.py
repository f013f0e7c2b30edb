"""Dataset I/O and splitting for the WS-DREAM response-time data.

The rtMatrix format holds one whitespace-separated row per user with ``-1``
marking failed invocations. Cells that are ``-1``, ``<= 0`` or non-finite are
treated as missing. Splits are drawn with numpy's PCG64 generator seeded by the
caller so the same (source, density, seed) always yields the same partition.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from qos_prediction.models import (
    DatasetFormatError,
    DatasetIntegrityError,
    DatasetSummary,
    QosMatrix,
    Split,
    UserRegionTable,
)

logger = logging.getLogger(__name__)

MISSING_MARKER = -1.0
UNKNOWN_REGION = "Unknown"
TRIPLET_COLUMNS = ["user_id", "service_id", "value"]
SEED_MODULUS = 2**64


def load_rt_matrix(path: Path) -> QosMatrix:
    """Parse an rtMatrix text file into a :class:`QosMatrix`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"QoS matrix not found: {path}")

    rows: List[np.ndarray] = []
    num_services: Optional[int] = None
    blank_after: Optional[int] = None
    with path.open("r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                blank_after = blank_after or line_number
                continue
            if blank_after is not None:
                raise DatasetFormatError("blank line inside the matrix", line_number=blank_after)
            if num_services is None:
                num_services = len(tokens)
            elif len(tokens) != num_services:
                raise DatasetFormatError(
                    f"expected {num_services} columns, found {len(tokens)}",
                    line_number=line_number,
                )
            try:
                rows.append(np.asarray(tokens, dtype=np.float64))
            except ValueError as exc:
                bad = next(token for token in tokens if not _is_number(token))
                raise DatasetFormatError(
                    f"non-numeric token {bad!r}", line_number=line_number
                ) from exc

    if not rows or num_services is None:
        raise DatasetFormatError(f"QoS matrix file is empty: {path}")

    dense = np.vstack(rows)
    observed = np.isfinite(dense) & (dense > 0)
    users, services = np.nonzero(observed)
    matrix = QosMatrix.from_triplets(
        dense.shape[0], dense.shape[1], users, services, dense[users, services]
    )
    logger.info(
        "Loaded %s: %d users, %d services, %d records",
        path,
        matrix.num_users,
        matrix.num_services,
        len(matrix),
    )
    return matrix


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def write_rt_matrix(matrix: QosMatrix, path: Path) -> Path:
    """Write ``matrix`` in rtMatrix format with full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, matrix.to_dense(fill_value=MISSING_MARKER), fmt="%.17g", delimiter=" ")
    return path


def load_user_regions(
    path: Path,
    *,
    user_id_column: str = "[User ID]",
    country_column: str = "[Country]",
) -> UserRegionTable:
    """Read the tab-separated user list into a :class:`UserRegionTable`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"User list not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            sep="\t",
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as exc:
        raise DatasetFormatError(f"user list is empty: {path}") from exc
    except pd.errors.ParserError as exc:
        raise DatasetFormatError(f"cannot parse user list {path}: {exc}") from exc
    frame.columns = [str(column).strip() for column in frame.columns]

    for column in (user_id_column, country_column):
        if column not in frame.columns:
            raise DatasetFormatError(
                f"column {column!r} missing from user list; found {list(frame.columns)}"
            )

    ids = pd.to_numeric(frame[user_id_column].str.strip(), errors="coerce")
    valid = ids.notna() & (ids == ids.round())
    skipped = int((~valid).sum())
    if skipped:
        logger.debug("Skipped %d non-data rows in %s", skipped, path)

    mapping: Dict[int, str] = {}
    unknown = 0
    for user_id, country in zip(ids[valid].astype(int), frame.loc[valid, country_column]):
        if user_id in mapping:
            raise DatasetIntegrityError(f"duplicate user id {user_id} in user list")
        label = str(country).strip()
        if not label:
            unknown += 1
            label = UNKNOWN_REGION
        mapping[int(user_id)] = label
    if unknown:
        logger.warning("%d users have no country; assigned region %r", unknown, UNKNOWN_REGION)

    table = UserRegionTable.from_mapping(mapping)
    logger.info(
        "Loaded %s: %d users over %d regions", path, table.num_users, len(table.regions)
    )
    return table


def split(source: QosMatrix, density: float, seed: int) -> Split:
    """Draw a uniform train subset of ``round(density * |entries|)`` entries."""
    if not 0.0 < density < 1.0:
        raise ValueError(f"density must lie in (0, 1), got {density}")
    total = len(source)
    if total == 0:
        raise ValueError("cannot split an empty QoS matrix")

    train_size = int(math.floor(density * total + 0.5))
    # any 64-bit seed, negative ones included
    rng = np.random.default_rng(int(seed) % SEED_MODULUS)
    chosen = rng.permutation(total)[:train_size]
    mask = np.zeros(total, dtype=bool)
    mask[chosen] = True
    return Split(
        train=source.subset(mask),
        test=source.subset(~mask),
        density=float(density),
        seed=int(seed),
        source_fingerprint=dataset_fingerprint(source),
    )


def dataset_fingerprint(matrix: QosMatrix) -> str:
    """Short SHA-256 digest of the dimensions and canonical entry arrays."""
    digest = hashlib.sha256()
    digest.update(f"{matrix.num_users}x{matrix.num_services}".encode("ascii"))
    for array in (matrix.users, matrix.services, matrix.values):
        digest.update(np.ascontiguousarray(array).tobytes())
    return digest.hexdigest()[:16]


def export_triplets(matrix: QosMatrix, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {"user_id": matrix.users, "service_id": matrix.services, "value": matrix.values}
    )
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def load_triplets(path: Path, num_users: int, num_services: int) -> QosMatrix:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Triplet file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [column for column in TRIPLET_COLUMNS if column not in frame.columns]
    if missing:
        raise DatasetFormatError(f"triplet file {path} lacks columns {missing}")
    return QosMatrix.from_triplets(
        num_users,
        num_services,
        frame["user_id"].to_numpy(dtype=np.int64),
        frame["service_id"].to_numpy(dtype=np.int64),
        frame["value"].to_numpy(dtype=np.float64),
    )


def export_split(data_split: Split, directory: Path) -> Tuple[Path, Path, Path]:
    """Write ``train.csv``, ``test.csv`` and ``split.json`` under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train_path = export_triplets(data_split.train, directory / "train.csv")
    test_path = export_triplets(data_split.test, directory / "test.csv")
    meta_path = directory / "split.json"
    meta_path.write_text(
        json.dumps(
            {
                "num_users": data_split.train.num_users,
                "num_services": data_split.train.num_services,
                "density": data_split.density,
                "seed": data_split.seed,
                "source_fingerprint": data_split.source_fingerprint,
                "n_train": len(data_split.train),
                "n_test": len(data_split.test),
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return train_path, test_path, meta_path


def load_split(directory: Path) -> Split:
    directory = Path(directory)
    meta_path = directory / "split.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"Split metadata not found: {meta_path}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    num_users, num_services = int(meta["num_users"]), int(meta["num_services"])
    return Split(
        train=load_triplets(directory / "train.csv", num_users, num_services),
        test=load_triplets(directory / "test.csv", num_users, num_services),
        density=float(meta["density"]),
        seed=int(meta["seed"]),
        source_fingerprint=str(meta.get("source_fingerprint", "")),
    )


def describe_dataset(
    matrix: QosMatrix, regions: Optional[UserRegionTable] = None
) -> DatasetSummary:
    low, high = matrix.value_range if len(matrix) else (float("nan"), float("nan"))
    return DatasetSummary(
        num_users=matrix.num_users,
        num_services=matrix.num_services,
        num_records=len(matrix),
        density=matrix.density,
        value_min=low,
        value_max=high,
        num_regions=None if regions is None else len(regions.regions),
    )


__all__ = [
    "MISSING_MARKER",
    "TRIPLET_COLUMNS",
    "UNKNOWN_REGION",
    "dataset_fingerprint",
    "describe_dataset",
    "export_split",
    "export_triplets",
    "load_rt_matrix",
    "load_split",
    "load_triplets",
    "load_user_regions",
    "split",
    "write_rt_matrix",
]
