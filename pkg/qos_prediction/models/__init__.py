"""Convenience re-exports for core data models."""

from .cache import (
    CACHE_SCHEMA_VERSION,
    CacheEnvelope,
    CacheIndex,
    NeighborCacheEntry,
    NeighborCacheKey,
    NeighborIndex,
)
from .dataset import DatasetSummary, QosMatrix, Split, UserRegionTable
from .errors import (
    CheckpointMismatchError,
    DatasetFormatError,
    DatasetIntegrityError,
    TrainingDivergenceError,
)
from .factors import EntryGradients, FactorGradients, FiemfParams, TrainingTrace
from .hyperparams import (
    FiemfHyperparams,
    MFHyperparams,
    RegularizationMode,
    SimilarityOptions,
    UipccHyperparams,
)
from .neighbors import (
    EntropyProfile,
    Neighbor,
    NeighborSet,
    NeighborTable,
    RelationshipMatrix,
    SimilarityDiagnostics,
    SimilarityResult,
)
from .region import BiasVectors, RegionModel
from .report import CELL_COLUMNS, EvalCell, EvalReport, SweepRow, SweepTable

__all__ = [
    "BiasVectors",
    "CACHE_SCHEMA_VERSION",
    "CELL_COLUMNS",
    "CacheEnvelope",
    "CacheIndex",
    "CheckpointMismatchError",
    "DatasetFormatError",
    "DatasetIntegrityError",
    "DatasetSummary",
    "EntropyProfile",
    "EntryGradients",
    "EvalCell",
    "EvalReport",
    "FactorGradients",
    "FiemfHyperparams",
    "FiemfParams",
    "MFHyperparams",
    "Neighbor",
    "NeighborCacheEntry",
    "NeighborCacheKey",
    "NeighborIndex",
    "NeighborSet",
    "NeighborTable",
    "QosMatrix",
    "RegionModel",
    "RegularizationMode",
    "RelationshipMatrix",
    "SimilarityDiagnostics",
    "SimilarityOptions",
    "SimilarityResult",
    "Split",
    "SweepRow",
    "SweepTable",
    "TrainingDivergenceError",
    "TrainingTrace",
    "UipccHyperparams",
    "UserRegionTable",
]
