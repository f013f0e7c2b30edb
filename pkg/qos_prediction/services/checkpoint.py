"""Save and restore fitted predictors as ``.npz`` archives with a JSON header."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from qos_prediction.models import (
    CheckpointMismatchError,
    FiemfHyperparams,
    MFHyperparams,
    UipccHyperparams,
)
from qos_prediction.predictors import (
    BasePredictor,
    BiasedMfPredictor,
    FiemfPredictor,
    IMeanPredictor,
    PmfPredictor,
    UipccPredictor,
    UMeanPredictor,
)

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1
_HEADER_KEY = "__header__"

_BUILDERS: Dict[str, Callable[[Dict[str, Any]], BasePredictor]] = {
    "umean": lambda hyper: UMeanPredictor(),
    "imean": lambda hyper: IMeanPredictor(),
    "uipcc": lambda hyper: UipccPredictor(UipccHyperparams.model_validate(hyper)),
    "pmf": lambda hyper: PmfPredictor(MFHyperparams.model_validate(hyper)),
    "biasedmf": lambda hyper: BiasedMfPredictor(MFHyperparams.model_validate(hyper)),
    "fiemf": lambda hyper: FiemfPredictor(FiemfHyperparams.model_validate(hyper)),
}


def save_checkpoint(predictor: BasePredictor, path: Path, *, fingerprint: str) -> Path:
    """Write ``predictor`` to ``path``; ``fingerprint`` identifies the source dataset."""
    state, arrays = predictor.to_state()
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "method": predictor.name,
        "fingerprint": fingerprint,
        **state,
    }
    if predictor.trace is not None:
        header["trace"] = predictor.trace.to_dict()
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {name: np.asarray(value) for name, value in arrays.items()}
    payload[_HEADER_KEY] = np.array(json.dumps(header, sort_keys=True))
    with path.open("wb") as fh:
        np.savez(fh, **payload)
    logger.info("Saved %s checkpoint to %s", predictor.name, path)
    return path


def read_checkpoint(path: Path) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as archive:
        if _HEADER_KEY not in archive.files:
            raise CheckpointMismatchError(f"{path} is not a checkpoint (no header)")
        header = json.loads(str(archive[_HEADER_KEY]))
        arrays = {name: archive[name] for name in archive.files if name != _HEADER_KEY}
    return header, arrays


def load_checkpoint(
    path: Path,
    *,
    fingerprint: Optional[str] = None,
    shape: Optional[Tuple[int, int]] = None,
) -> BasePredictor:
    """Rebuild a fitted predictor, refusing mismatched datasets or dimensions."""
    header, arrays = read_checkpoint(path)
    version = header.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointMismatchError(f"unsupported checkpoint format version {version!r}")
    method = header.get("method")
    if method not in _BUILDERS:
        raise CheckpointMismatchError(f"unknown checkpoint method {method!r}")
    if fingerprint is not None and header.get("fingerprint") != fingerprint:
        raise CheckpointMismatchError(
            f"checkpoint fingerprint {header.get('fingerprint')} does not match {fingerprint}"
        )
    stored_shape = tuple(int(v) for v in header["shape"])
    if shape is not None and stored_shape != tuple(shape):
        raise CheckpointMismatchError(
            f"checkpoint covers {stored_shape[0]}x{stored_shape[1]}, "
            f"expected {shape[0]}x{shape[1]}"
        )

    predictor = _BUILDERS[method](header.get("hyperparameters", {}))
    predictor.load_state(header, arrays)
    return predictor


__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
]
