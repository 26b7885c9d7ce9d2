"""Same-die similarity scoring for registered scan pairs."""

from .distance import SOURCE_VOXEL, TARGET_VOXEL, DistanceSamples, cloud_to_cloud
from .histogram import CUTOFF, N_BINS, DistanceHistogram, histogram
from .logistic import (
    LogisticModel,
    TrainingConfig,
    TrainingMeta,
    load_model,
    predict,
    save_model,
    train_logistic,
)
from .scoring import (
    PairScore,
    canonical_pair,
    downsample_for_scoring,
    read_scores_csv,
    score_pair,
    scores_to_csv,
    write_scores_csv,
)

__all__ = [
    "CUTOFF",
    "N_BINS",
    "SOURCE_VOXEL",
    "TARGET_VOXEL",
    "DistanceHistogram",
    "DistanceSamples",
    "LogisticModel",
    "PairScore",
    "TrainingConfig",
    "TrainingMeta",
    "canonical_pair",
    "cloud_to_cloud",
    "downsample_for_scoring",
    "histogram",
    "load_model",
    "predict",
    "read_scores_csv",
    "save_model",
    "score_pair",
    "scores_to_csv",
    "train_logistic",
    "write_scores_csv",
]
