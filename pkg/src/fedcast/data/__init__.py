"""Dataset pipeline: ingestion, cleansing, scaling, windowing, synthesis."""

from .heterogeneity import histogram, kl_divergence, kl_matrix
from .importance import permutation_importance
from .scaling import (
    STD_FLOOR,
    Scaler,
    fit_scaler,
    inverse_transform,
    inverse_transform_targets,
    transform,
)
from .series import (
    FEATURES,
    RawSeries,
    downsample,
    load_csv,
    merge_exogenous,
    write_csv,
    zero_corrupted,
)
from .synthetic import SyntheticSpec, generate_client, generate_cohort
from .windows import SPLIT_NAMES, WindowedDataset, chrono_split, make_windows

__all__ = [
    "FEATURES",
    "SPLIT_NAMES",
    "STD_FLOOR",
    "RawSeries",
    "Scaler",
    "SyntheticSpec",
    "WindowedDataset",
    "chrono_split",
    "downsample",
    "fit_scaler",
    "generate_client",
    "generate_cohort",
    "histogram",
    "inverse_transform",
    "inverse_transform_targets",
    "kl_divergence",
    "kl_matrix",
    "load_csv",
    "make_windows",
    "merge_exogenous",
    "permutation_importance",
    "transform",
    "write_csv",
    "zero_corrupted",
]
