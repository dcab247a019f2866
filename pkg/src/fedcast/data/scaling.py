"""Per-client standardisation fitted on training rows only.

The scaler carries one mean and one population standard deviation per
feature. Constant features get their deviation floored so transforming
them is a no-op around zero instead of a division blow-up.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .series import RawSeries

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray  # float64, shape (d,)
    std: np.ndarray   # float64, shape (d,), >= STD_FLOOR

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def _as_values(data: RawSeries | np.ndarray) -> np.ndarray:
    if isinstance(data, RawSeries):
        return data.values
    return np.asarray(data, dtype=np.float64)


def fit_scaler(train: RawSeries | np.ndarray) -> Scaler:
    """Fit mean and population std per feature on training rows only.

    A split-tagged series must carry the train tag; raw arrays and
    untagged series are the caller's responsibility.
    """
    if isinstance(train, RawSeries) and train.split not in (None, "train"):
        raise ValueError(
            f"scaler must be fitted on the train split, got {train.split!r}")
    values = _as_values(train)
    if values.ndim != 2 or values.shape[0] == 0:
        raise ValueError(
            f"expected a non-empty (rows, features) array, got shape {values.shape}")
    mean = values.mean(axis=0)
    std = values.std(axis=0)  # population form, ddof=0
    std = np.maximum(std, STD_FLOOR)
    return Scaler(mean=mean, std=std)


def transform(scaler: Scaler, data: RawSeries | np.ndarray):
    values = _as_values(data)
    if values.shape[-1] != scaler.n_features:
        raise ValueError(
            f"last axis holds {values.shape[-1]} features, scaler has {scaler.n_features}")
    out = (values - scaler.mean) / scaler.std
    if isinstance(data, RawSeries):
        return replace(data, values=out)
    return out


def inverse_transform(scaler: Scaler, data: RawSeries | np.ndarray):
    values = _as_values(data)
    if values.shape[-1] != scaler.n_features:
        raise ValueError(
            f"last axis holds {values.shape[-1]} features, scaler has {scaler.n_features}")
    out = values * scaler.std + scaler.mean
    if isinstance(data, RawSeries):
        return replace(data, values=out)
    return out


def inverse_transform_targets(scaler: Scaler, target_indices: tuple[int, ...],
                              values: np.ndarray) -> np.ndarray:
    """Undo scaling on arrays whose last axis holds only the target features.

    Predictions and window targets have shape (..., len(target_indices));
    this applies the matching per-feature slopes and offsets.
    """
    idx = np.asarray(target_indices, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("need at least one target index")
    if (idx < 0).any() or (idx >= scaler.n_features).any():
        raise ValueError(
            f"target indices {list(target_indices)} out of range for "
            f"{scaler.n_features} features")
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != idx.size:
        raise ValueError(
            f"last axis holds {values.shape[-1]} columns, expected {idx.size} targets")
    return values * scaler.std[idx] + scaler.mean[idx]
