"""UIPCC: hybrid of user-based and item-based Pearson-correlation CF.

PCC between two users (services) is computed over their co-observed entries
with each entity centered on the mean of all of its training observations.
Pairs sharing fewer than ``min_corated`` entries get similarity 0, and
significance weighting multiplies PCC by ``2|co| / (|I_a| + |I_b|)``.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
from numba import njit
from scipy import sparse

from qos_prediction.models import (
    NeighborTable,
    QosMatrix,
    RegionModel,
    UipccHyperparams,
)

from .base import BasePredictor, ProgressHook
from .means import service_means, user_means

logger = logging.getLogger(__name__)

_SIMILARITY_BLOCK = 512


def pcc_similarity(
    ratings: np.ndarray,
    mask: np.ndarray,
    means: np.ndarray,
    *,
    min_corated: int = 2,
    significance_weighting: bool = True,
    block_size: int = _SIMILARITY_BLOCK,
) -> np.ndarray:
    """Pairwise PCC between the rows of a dense ``ratings`` matrix.

    ``mask`` flags observed cells and ``means`` holds each row's mean. The
    diagonal is zero.
    """
    observed = mask.astype(np.float64)
    centered = (ratings - means[:, None]) * observed
    squared = centered**2
    counts = observed.sum(axis=1)
    rows = ratings.shape[0]
    result = np.zeros((rows, rows), dtype=np.float64)
    for start in range(0, rows, block_size):
        stop = min(start + block_size, rows)
        numerator = centered[start:stop] @ centered.T
        own_spread = squared[start:stop] @ observed.T
        other_spread = observed[start:stop] @ squared.T
        co_counts = observed[start:stop] @ observed.T
        denominator = np.sqrt(own_spread * other_spread)
        valid = (co_counts >= min_corated) & (denominator > 0)
        block = np.zeros_like(numerator)
        block[valid] = numerator[valid] / denominator[valid]
        if significance_weighting:
            totals = counts[start:stop, None] + counts[None, :]
            with np.errstate(invalid="ignore", divide="ignore"):
                weights = np.where(totals > 0, 2.0 * co_counts / totals, 0.0)
            block *= weights
        result[start:stop] = block
    np.fill_diagonal(result, 0.0)
    return result


@njit(nogil=True, cache=True)
def _neighborhood_predict(
    targets,
    groups,
    indptr,
    indices,
    values,
    similarity,
    target_means,
    other_means,
    top_k,
):
    """Mean-centered top-k prediction for each (target, group) query.

    For UPCC the target is a user and the group a service whose raters are
    listed in ``indices``; IPCC swaps the roles. Returns predictions and a flag
    telling whether any positive-similarity neighbor contributed.
    """
    count = targets.shape[0]
    predictions = np.zeros(count)
    defined = np.zeros(count, dtype=np.bool_)
    for q in range(count):
        t = targets[q]
        g = groups[q]
        start = indptr[g]
        stop = indptr[g + 1]
        size = stop - start
        if size == 0:
            continue
        sims = np.empty(size)
        deviations = np.empty(size)
        used = 0
        for idx in range(start, stop):
            other = indices[idx]
            if other == t:
                continue
            s = similarity[t, other]
            if s > 0.0:
                sims[used] = s
                deviations[used] = values[idx] - other_means[other]
                used += 1
        if used == 0:
            continue
        order = np.argsort(-sims[:used], kind="mergesort")
        numerator = 0.0
        denominator = 0.0
        for r in range(min(top_k, used)):
            pick = order[r]
            numerator += sims[pick] * deviations[pick]
            denominator += sims[pick]
        predictions[q] = target_means[t] + numerator / denominator
        defined[q] = True
    return predictions, defined


class UipccPredictor(BasePredictor):
    name = "uipcc"

    def __init__(
        self, hyper: Optional[UipccHyperparams] = None, *, clamp: bool = True
    ) -> None:
        super().__init__(clamp=clamp)
        self.hyper = hyper or UipccHyperparams()
        self._train: Optional[QosMatrix] = None
        self._by_service: Optional[sparse.csc_matrix] = None
        self.user_similarity: Optional[np.ndarray] = None
        self.service_similarity: Optional[np.ndarray] = None
        self.user_means: Optional[np.ndarray] = None
        self.service_means: Optional[np.ndarray] = None
        self.global_mean = 0.0

    def hyperparameters(self) -> Dict[str, Any]:
        return self.hyper.to_dict()

    def _fit(
        self,
        train: QosMatrix,
        *,
        regions: Optional[RegionModel],
        neighbors: Optional[NeighborTable],
        progress_hook: ProgressHook | None,
    ) -> None:
        self._prepare(train)

    def _prepare(self, train: QosMatrix) -> None:
        self._train = train
        self._by_service = train.csr.tocsc()
        self._by_service.sort_indices()
        self.global_mean = train.global_mean
        self.user_means = user_means(train)
        self.service_means = service_means(train)

        dense = train.to_dense(fill_value=0.0)
        mask = np.zeros(train.shape, dtype=bool)
        mask[train.users, train.services] = True
        options = {
            "min_corated": self.hyper.min_corated,
            "significance_weighting": self.hyper.significance_weighting,
        }
        self.user_similarity = pcc_similarity(dense, mask, self.user_means, **options)
        self.service_similarity = pcc_similarity(dense.T, mask.T, self.service_means, **options)
        logger.debug(
            "UIPCC similarities: %d positive user pairs, %d positive service pairs",
            int(np.count_nonzero(self.user_similarity > 0)) // 2,
            int(np.count_nonzero(self.service_similarity > 0)) // 2,
        )

    def _side_predictions(
        self, users: np.ndarray, services: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        train = self._train
        by_service = self._by_service
        upcc, upcc_defined = _neighborhood_predict(
            users,
            services,
            by_service.indptr.astype(np.int64),
            by_service.indices.astype(np.int64),
            by_service.data.astype(np.float64),
            self.user_similarity,
            self.user_means,
            self.user_means,
            self.hyper.top_k,
        )
        ipcc, ipcc_defined = _neighborhood_predict(
            services,
            users,
            train.user_offsets,
            np.ascontiguousarray(train.services, dtype=np.int64),
            np.ascontiguousarray(train.values, dtype=np.float64),
            self.service_similarity,
            self.service_means,
            self.service_means,
            self.hyper.top_k,
        )
        return upcc, upcc_defined, ipcc, ipcc_defined

    def predict_raw(self, users: np.ndarray, services: np.ndarray) -> np.ndarray:
        blend = self.hyper.blend
        upcc, upcc_defined, ipcc, ipcc_defined = self._side_predictions(users, services)

        has_user = self._train.user_counts[users] > 0
        has_service = self._train.service_counts[services] > 0
        u_mean = self.user_means[users]
        s_mean = self.service_means[services]
        fallback = np.full(users.shape, self.global_mean, dtype=np.float64)
        fallback = np.where(has_user, u_mean, fallback)
        fallback = np.where(has_service, s_mean, fallback)
        both = blend * u_mean + (1 - blend) * s_mean
        fallback = np.where(has_user & has_service, both, fallback)

        prediction = np.where(upcc_defined, upcc, ipcc)
        prediction = np.where(
            upcc_defined & ipcc_defined, blend * upcc + (1 - blend) * ipcc, prediction
        )
        neither = ~(upcc_defined | ipcc_defined)
        prediction = np.where(neither, fallback, prediction)
        logger.debug(
            "UIPCC: %d of %d predictions fell back to means", int(neither.sum()), users.size
        )
        return prediction

    def _arrays(self) -> Dict[str, np.ndarray]:
        return {
            "train_users": self._train.users,
            "train_services": self._train.services,
            "train_values": self._train.values,
        }

    def _restore(self, arrays: Dict[str, np.ndarray]) -> None:
        num_users, num_services = self.shape
        self._prepare(
            QosMatrix.from_triplets(
                num_users,
                num_services,
                arrays["train_users"],
                arrays["train_services"],
                arrays["train_values"],
            )
        )


def uipcc_predict(
    i: int, j: int, train: QosMatrix, config: Optional[UipccHyperparams] = None
) -> float:
    """Single raw UIPCC prediction; fits a throwaway predictor on ``train``."""
    predictor = UipccPredictor(config, clamp=False).fit(train)
    return predictor.predict_one(i, j)


__all__ = ["UipccPredictor", "pcc_similarity", "uipcc_predict"]
