"""Validated hyperparameter groups shared by the predictors and the settings layer."""

from __future__ import annotations

from typing import Any, Dict, Literal, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field

RegularizationMode = Literal["per_entry", "per_count"]


class _Hyperparams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    def with_updates(self, **updates: Any) -> "_Hyperparams":
        """Return a re-validated copy with ``updates`` applied."""
        payload = self.model_dump()
        payload.update(updates)
        return type(self).model_validate(payload)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class SimilarityOptions(_Hyperparams):
    """How fuzzy-entropy similarities are computed."""

    r_med_mode: Literal["user", "global"] = Field(
        default="user",
        description="Median threshold scope: per-user over the active index set, or global",
    )
    min_corated: int = Field(
        default=2,
        ge=1,
        description="Minimum co-rated services for a non-zero similarity",
    )
    pair_cap: int = Field(
        default=1000,
        ge=2,
        description="Co-rated sets larger than this are deterministically subsampled",
    )
    cap_seed: int = Field(default=0, description="Seed mixed with the user pair for subsampling")


class FiemfHyperparams(_Hyperparams):
    """Hyperparameters of the fused FIEMF model and its SGD trainer."""

    alpha: float = Field(default=0.15, ge=0.0, le=1.0, description="Interaction/bias mix")
    lam: float = Field(
        default=18.0,
        ge=0.0,
        validation_alias=AliasChoices("lam", "lambda"),
        description="Weight-decay coefficient",
    )
    gamma: float = Field(default=18.0, ge=0.0, description="Neighborhood regularizer weight")
    penalty_scale: float = Field(
        default=1e-3,
        gt=0.0,
        description="Multiplier turning lambda and gamma into per-update penalty strengths",
    )
    dim: int = Field(
        default=10,
        ge=1,
        validation_alias=AliasChoices("dim", "d"),
        description="Latent dimension",
    )
    neighbors: int = Field(
        default=10,
        ge=1,
        validation_alias=AliasChoices("neighbors", "k"),
        description="Top-K neighbor count",
    )
    learning_rate: float = Field(default=0.01, gt=0.0, description="Initial SGD step size")
    lr_decay: float = Field(
        default=0.99,
        gt=0.0,
        le=1.0,
        description="Multiplicative learning-rate decay per epoch",
    )
    max_iters: int = Field(default=300, ge=1, description="Maximum number of epochs")
    tolerance: float = Field(
        default=1e-6,
        ge=0.0,
        description="Stop when the epoch-mean absolute parameter update falls below this",
    )
    init_seed: int = Field(default=0, description="Seed for initialization and shuffling")
    init_scale: Optional[float] = Field(
        default=None,
        gt=0.0,
        description="Upper bound of the uniform factor initialization (default derived)",
    )
    full_neighbor_gradient: bool = Field(
        default=False,
        description="Include the neighborhood cross-terms omitted by the local gradient",
    )
    regularization: RegularizationMode = Field(
        default="per_entry",
        description="Apply lambda/gamma terms per visited entry, or scaled by entry counts",
    )


class MFHyperparams(_Hyperparams):
    """Hyperparameters of the PMF and BiasedMF baselines."""

    dim: int = Field(default=10, ge=1, validation_alias=AliasChoices("dim", "d"))
    lam: float = Field(default=0.05, ge=0.0, validation_alias=AliasChoices("lam", "lambda"))
    learning_rate: float = Field(default=0.01, gt=0.0)
    lr_decay: float = Field(default=0.95, gt=0.0, le=1.0)
    max_iters: int = Field(default=300, ge=1)
    tolerance: float = Field(default=1e-6, ge=0.0)
    init_seed: int = Field(default=0)
    init_scale: Optional[float] = Field(default=None, gt=0.0)
    regularization: RegularizationMode = Field(default="per_entry")
    use_global_offset: bool = Field(
        default=False,
        description="BiasedMF only: add the global training mean as a constant offset",
    )


class UipccHyperparams(_Hyperparams):
    """Hyperparameters of the hybrid user/item PCC baseline."""

    top_k: int = Field(default=10, ge=1)
    blend: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        description="Weight of the user-based prediction in the hybrid",
    )
    min_corated: int = Field(default=2, ge=2)
    significance_weighting: bool = Field(default=True)


__all__ = [
    "FiemfHyperparams",
    "MFHyperparams",
    "RegularizationMode",
    "SimilarityOptions",
    "UipccHyperparams",
]
