"""Shared SGD machinery for the latent-factor models.

Every factor model here predicts

    q_hat(i, j) = w_mf * <U_i, S_j> + w_bias * (offset_i + b_i + p_j)

and minimizes

    1/2 sum (q - q_hat)^2 + lam/2 (|U|^2 + |S|^2 + |b|^2 + |p|^2)
        + gamma/2 sum_i |U_i - sum_{a in N(i)} w_ia U_a|^2

FIEMF uses ``w_mf = alpha``, ``w_bias = 1 - alpha`` and region means as
offsets. PMF is ``(1, 0)`` with ``gamma = 0`` and BiasedMF is ``(1, 1)`` with
``gamma = 0``, so all three run through the same epoch kernel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from numba import njit
from scipy import sparse

from qos_prediction.models import (
    BiasVectors,
    EntryGradients,
    FactorGradients,
    FiemfHyperparams,
    FiemfParams,
    MFHyperparams,
    NeighborTable,
    QosMatrix,
    TrainingDivergenceError,
    TrainingTrace,
)
from qos_prediction.utils.progress import emit_progress

logger = logging.getLogger(__name__)

DIVERGENCE_LOSS = 1e12

TrainerHyperparams = Union[FiemfHyperparams, MFHyperparams]


@dataclass(frozen=True)
class FactorTerms:
    """Mixing weights and regularization strengths of one factor model."""

    w_mf: float
    w_bias: float
    lam: float
    gamma: float = 0.0

    @classmethod
    def fiemf(cls, alpha: float, lam: float, gamma: float) -> "FactorTerms":
        return cls(w_mf=float(alpha), w_bias=1.0 - float(alpha), lam=lam, gamma=gamma)

    @classmethod
    def pmf(cls, lam: float) -> "FactorTerms":
        return cls(w_mf=1.0, w_bias=0.0, lam=lam, gamma=0.0)

    @classmethod
    def biasedmf(cls, lam: float) -> "FactorTerms":
        return cls(w_mf=1.0, w_bias=1.0, lam=lam, gamma=0.0)


@njit(nogil=True, cache=True)
def _sgd_epoch(
    order,
    users,
    services,
    values,
    U,
    S,
    b,
    p,
    offsets,
    w_mf,
    w_bias,
    lam,
    gamma,
    lr,
    nbr_indptr,
    nbr_indices,
    nbr_weights,
    rev_indptr,
    rev_indices,
    rev_weights,
    full_gradient,
    user_scale,
    service_scale,
):
    d = U.shape[1]
    grad_u = np.empty(d)
    grad_s = np.empty(d)
    anchor = np.empty(d)
    residual_k = np.empty(d)
    sq_err = 0.0
    abs_update = 0.0
    for t in range(order.shape[0]):
        k = order[t]
        i = users[k]
        j = services[k]

        dot = 0.0
        for f in range(d):
            dot += U[i, f] * S[j, f]
        e = values[k] - (w_mf * dot + w_bias * (offsets[i] + b[i] + p[j]))
        sq_err += e * e

        cu = user_scale[i]
        cs = service_scale[j]
        for f in range(d):
            anchor[f] = 0.0
        for idx in range(nbr_indptr[i], nbr_indptr[i + 1]):
            a = nbr_indices[idx]
            w = nbr_weights[idx]
            for f in range(d):
                anchor[f] += w * U[a, f]
        for f in range(d):
            grad_u[f] = cu * (lam * U[i, f] + gamma * (U[i, f] - anchor[f])) - w_mf * e * S[j, f]
            grad_s[f] = cs * lam * S[j, f] - w_mf * e * U[i, f]

        if full_gradient:
            # users whose neighbor lists contain i
            for r in range(rev_indptr[i], rev_indptr[i + 1]):
                owner = rev_indices[r]
                w_owner = rev_weights[r]
                for f in range(d):
                    residual_k[f] = U[owner, f]
                for idx in range(nbr_indptr[owner], nbr_indptr[owner + 1]):
                    a = nbr_indices[idx]
                    w = nbr_weights[idx]
                    for f in range(d):
                        residual_k[f] -= w * U[a, f]
                for f in range(d):
                    grad_u[f] -= cu * gamma * w_owner * residual_k[f]

        grad_b = cu * lam * b[i] - w_bias * e
        grad_p = cs * lam * p[j] - w_bias * e

        for f in range(d):
            U[i, f] -= lr * grad_u[f]
            S[j, f] -= lr * grad_s[f]
            abs_update += lr * (abs(grad_u[f]) + abs(grad_s[f]))
        b[i] -= lr * grad_b
        p[j] -= lr * grad_p
        abs_update += lr * (abs(grad_b) + abs(grad_p))
    return sq_err, abs_update


def predict_entries(
    users: np.ndarray,
    services: np.ndarray,
    params: FiemfParams,
    terms: FactorTerms,
) -> np.ndarray:
    dots = np.einsum("ij,ij->i", params.U[users], params.S[services])
    bias = params.mu[users] + params.biases.b[users] + params.biases.p[services]
    return terms.w_mf * dots + terms.w_bias * bias


def _neighborhood_residual(
    params: FiemfParams,
    weight_matrix: Optional[sparse.spmatrix],
    anchor: Optional[np.ndarray],
) -> Optional[np.ndarray]:
    if weight_matrix is None:
        return None
    target = params.U if anchor is None else anchor
    return params.U - weight_matrix @ target


def factor_objective(
    train: QosMatrix,
    params: FiemfParams,
    terms: FactorTerms,
    weight_matrix: Optional[sparse.spmatrix] = None,
    *,
    anchor: Optional[np.ndarray] = None,
) -> float:
    """Full-batch objective; ``anchor`` freezes the neighbor side of the regularizer."""
    residuals = train.values - predict_entries(train.users, train.services, params, terms)
    loss = 0.5 * float(residuals @ residuals)
    loss += 0.5 * terms.lam * float(
        np.sum(params.U**2)
        + np.sum(params.S**2)
        + np.sum(params.biases.b**2)
        + np.sum(params.biases.p**2)
    )
    neighborhood = _neighborhood_residual(params, weight_matrix, anchor)
    if neighborhood is not None:
        loss += 0.5 * terms.gamma * float(np.sum(neighborhood**2))
    return loss


def factor_gradient(
    train: QosMatrix,
    params: FiemfParams,
    terms: FactorTerms,
    weight_matrix: Optional[sparse.spmatrix] = None,
    *,
    anchor: Optional[np.ndarray] = None,
    full_neighbor_gradient: bool = False,
) -> FactorGradients:
    """Full-batch gradient of :func:`factor_objective`.

    Without ``full_neighbor_gradient`` the neighborhood term differentiates only
    ``U_i``'s own penalty, which is the exact gradient of the objective with the
    anchor frozen at the current ``U``.
    """
    if anchor is not None and full_neighbor_gradient:
        raise ValueError("a frozen anchor and the full neighbor gradient are exclusive")
    residuals = train.values - predict_entries(train.users, train.services, params, terms)
    R = sparse.csr_matrix((residuals, (train.users, train.services)), shape=train.shape)
    grad_u = terms.lam * params.U - terms.w_mf * (R @ params.S)
    grad_s = terms.lam * params.S - terms.w_mf * (R.T @ params.U)
    grad_b = terms.lam * params.biases.b - terms.w_bias * np.bincount(
        train.users, weights=residuals, minlength=train.num_users
    )
    grad_p = terms.lam * params.biases.p - terms.w_bias * np.bincount(
        train.services, weights=residuals, minlength=train.num_services
    )
    neighborhood = _neighborhood_residual(params, weight_matrix, anchor)
    if neighborhood is not None:
        grad_u = grad_u + terms.gamma * neighborhood
        if full_neighbor_gradient:
            grad_u = grad_u - terms.gamma * (weight_matrix.T @ neighborhood)
    return FactorGradients(U=np.asarray(grad_u), S=np.asarray(grad_s), b=grad_b, p=grad_p)


def entry_gradients(
    i: int,
    j: int,
    e: float,
    params: FiemfParams,
    terms: FactorTerms,
    neighbors: Optional[NeighborTable] = None,
    *,
    full_neighbor_gradient: bool = False,
    user_scale: float = 1.0,
    service_scale: float = 1.0,
) -> EntryGradients:
    """Gradient contributions of the observed entry (i, j) with residual ``e``."""
    U, S = params.U, params.S
    anchor = np.zeros(params.dim)
    if neighbors is not None:
        for neighbor in neighbors[i].neighbors:
            anchor += neighbor.weight * U[neighbor.neighbor_id]
    grad_u = (
        user_scale * (terms.lam * U[i] + terms.gamma * (U[i] - anchor)) - terms.w_mf * e * S[j]
    )
    if full_neighbor_gradient and neighbors is not None:
        for owner_set in neighbors.sets:
            for neighbor in owner_set.neighbors:
                if neighbor.neighbor_id != i:
                    continue
                owner_anchor = np.zeros(params.dim)
                for other in owner_set.neighbors:
                    owner_anchor += other.weight * U[other.neighbor_id]
                grad_u = grad_u - user_scale * terms.gamma * neighbor.weight * (
                    U[owner_set.user_id] - owner_anchor
                )
    grad_s = service_scale * terms.lam * S[j] - terms.w_mf * e * U[i]
    grad_b = user_scale * terms.lam * params.biases.b[i] - terms.w_bias * e
    grad_p = service_scale * terms.lam * params.biases.p[j] - terms.w_bias * e
    return EntryGradients(u=grad_u, s=grad_s, b=float(grad_b), p=float(grad_p))


def _neighbor_arrays(
    neighbors: Optional[NeighborTable], num_users: int
) -> Tuple[np.ndarray, ...]:
    if neighbors is None:
        indptr = np.zeros(num_users + 1, dtype=np.int64)
        indices = np.zeros(0, dtype=np.int64)
        weights = np.zeros(0, dtype=np.float64)
        return indptr, indices, weights, indptr, indices, weights
    if neighbors.num_users != num_users:
        raise ValueError(
            f"neighbor table covers {neighbors.num_users} users, train has {num_users}"
        )
    return (*neighbors.csr_arrays(), *neighbors.reverse_csr_arrays())


def _regularization_scales(
    train: QosMatrix, mode: str
) -> Tuple[np.ndarray, np.ndarray]:
    if mode == "per_entry":
        return np.ones(train.num_users), np.ones(train.num_services)
    if mode == "per_count":
        return (
            1.0 / np.maximum(train.user_counts, 1).astype(np.float64),
            1.0 / np.maximum(train.service_counts, 1).astype(np.float64),
        )
    raise ValueError(f"unknown regularization mode {mode!r}")


def initialize_params(
    train: QosMatrix,
    dim: int,
    rng: np.random.Generator,
    *,
    init_scale: Optional[float] = None,
    offsets: Optional[np.ndarray] = None,
) -> FiemfParams:
    """U, S ~ Uniform(0, scale) with scale defaulting to 0.1 * sqrt(global_mean / d)."""
    scale = init_scale if init_scale is not None else 0.1 * np.sqrt(train.global_mean / dim)
    U = rng.uniform(0.0, scale, size=(train.num_users, dim))
    S = rng.uniform(0.0, scale, size=(train.num_services, dim))
    mu = (
        np.zeros(train.num_users, dtype=np.float64)
        if offsets is None
        else np.array(offsets, dtype=np.float64)
    )
    if mu.shape != (train.num_users,):
        raise ValueError("offsets must hold one value per user")
    return FiemfParams(
        U=U, S=S, biases=BiasVectors.zeros(train.num_users, train.num_services), mu=mu
    )


def _loss_and_rmse(
    train: QosMatrix,
    params: FiemfParams,
    terms: FactorTerms,
    weight_matrix: Optional[sparse.spmatrix],
) -> Tuple[float, float]:
    residuals = train.values - predict_entries(train.users, train.services, params, terms)
    rmse = float(np.sqrt(np.mean(residuals**2)))
    return factor_objective(train, params, terms, weight_matrix), rmse


def train_factor_model(
    train: QosMatrix,
    terms: FactorTerms,
    hyper: TrainerHyperparams,
    *,
    offsets: Optional[np.ndarray] = None,
    neighbors: Optional[NeighborTable] = None,
    full_neighbor_gradient: bool = False,
    progress_hook: Optional[Callable[[int], None]] = None,
    label: str = "model",
) -> Tuple[FiemfParams, TrainingTrace]:
    """Run shuffled per-entry SGD until ``max_iters`` or the update falls below tolerance.

    Initialization and shuffling draw from two independent streams spawned
    from ``hyper.init_seed``.
    """
    if not len(train):
        raise ValueError("cannot train on an empty matrix")

    init_seq, shuffle_seq = np.random.SeedSequence(hyper.init_seed).spawn(2)
    params = initialize_params(
        train,
        hyper.dim,
        np.random.default_rng(init_seq),
        init_scale=hyper.init_scale,
        offsets=offsets,
    )
    shuffle_rng = np.random.default_rng(shuffle_seq)

    nbr_indptr, nbr_indices, nbr_weights, rev_indptr, rev_indices, rev_weights = (
        _neighbor_arrays(neighbors, train.num_users)
    )
    weight_matrix = neighbors.weight_matrix if neighbors is not None else None
    user_scale, service_scale = _regularization_scales(train, hyper.regularization)
    users = np.ascontiguousarray(train.users, dtype=np.int64)
    services = np.ascontiguousarray(train.services, dtype=np.int64)
    values = np.ascontiguousarray(train.values, dtype=np.float64)
    touched = len(train) * (2 * hyper.dim + 2)

    trace = TrainingTrace()
    trace.initial_loss, trace.initial_rmse = _loss_and_rmse(train, params, terms, weight_matrix)
    last_finite = trace.initial_loss
    logger.debug(
        "%s: initial loss %.6g, train RMSE %.6g", label, trace.initial_loss, trace.initial_rmse
    )

    for epoch in range(hyper.max_iters):
        lr = hyper.learning_rate * hyper.lr_decay**epoch
        order = shuffle_rng.permutation(len(train))
        _, abs_update = _sgd_epoch(
            order,
            users,
            services,
            values,
            params.U,
            params.S,
            params.biases.b,
            params.biases.p,
            params.mu,
            float(terms.w_mf),
            float(terms.w_bias),
            float(terms.lam),
            float(terms.gamma),
            float(lr),
            nbr_indptr,
            nbr_indices,
            nbr_weights,
            rev_indptr,
            rev_indices,
            rev_weights,
            bool(full_neighbor_gradient),
            user_scale,
            service_scale,
        )
        loss, rmse = _loss_and_rmse(train, params, terms, weight_matrix)
        if not params.is_finite() or not np.isfinite(loss) or loss > DIVERGENCE_LOSS:
            logger.error("%s diverged at epoch %d (loss %s)", label, epoch + 1, loss)
            raise TrainingDivergenceError(
                f"{label} training diverged", epoch=epoch + 1, last_finite_loss=last_finite
            )
        last_finite = loss
        mean_update = abs_update / touched
        trace.record(loss=loss, rmse=rmse, learning_rate=lr, mean_update=mean_update)
        emit_progress(progress_hook)
        if mean_update < hyper.tolerance:
            trace.converged = True
            trace.stop_epoch = epoch + 1
            break

    if trace.stop_epoch is None:
        trace.stop_epoch = trace.epochs
    logger.info(
        "%s trained for %d epochs (converged=%s): loss %.6g, train RMSE %.6g",
        label,
        trace.epochs,
        trace.converged,
        trace.losses[-1],
        trace.train_rmse[-1],
    )
    return params, trace


__all__ = [
    "DIVERGENCE_LOSS",
    "FactorTerms",
    "entry_gradients",
    "factor_gradient",
    "factor_objective",
    "initialize_params",
    "predict_entries",
    "train_factor_model",
]
