"""Chronological splitting and sliding-window extraction.

Splitting happens on the row level before any windowing, so no window
ever straddles a split boundary and the three partitions stay disjoint
in time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import floor

import numpy as np

from .series import RawSeries

SPLIT_NAMES = ("train", "val", "test")


@dataclass
class WindowedDataset:
    """Model-ready windows for one client and one split.

    inputs:  (n_windows, lookback, d) float32, scaled feature rows
    targets: (n_windows, horizon, len(target_indices)) float32
    """

    client_id: str
    split: str
    inputs: np.ndarray
    targets: np.ndarray
    target_indices: tuple[int, ...]

    @property
    def n_windows(self) -> int:
        return self.inputs.shape[0]

    @property
    def lookback(self) -> int:
        return self.inputs.shape[1]

    @property
    def horizon(self) -> int:
        return self.targets.shape[1]


def chrono_split(series: RawSeries,
                 fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
                 ) -> tuple[RawSeries, RawSeries, RawSeries]:
    """Split rows into train/val/test prefix blocks, tagging each part.

    Boundaries floor the cumulative fractions, so train gets
    floor(f1*n) rows and validation up to floor((f1+f2)*n). Fractions
    must be positive and sum to 1; a split left empty is an error.
    """
    f1, f2, f3 = fractions
    if min(f1, f2, f3) <= 0.0:
        raise ValueError(f"split fractions must be positive, got {fractions}")
    if abs((f1 + f2 + f3) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {fractions}")
    n = series.n_rows
    # The epsilon keeps exact products like 0.6*15 from flooring to 8
    # off a one-ulp-low double.
    b1 = floor(f1 * n + 1e-9)
    b2 = floor((f1 + f2) * n + 1e-9)
    if b1 == 0 or b2 == b1 or b2 == n:
        raise ValueError(
            f"{n} rows split {fractions} leaves an empty partition "
            f"(boundaries {b1}, {b2})")
    parts = []
    for name, lo, hi in (("train", 0, b1), ("val", b1, b2), ("test", b2, n)):
        parts.append(replace(
            series,
            timestamps=series.timestamps[lo:hi].copy(),
            values=series.values[lo:hi].copy(),
            split=name,
        ))
    return tuple(parts)


def make_windows(series: RawSeries, lookback: int, horizon: int,
                 target_indices: tuple[int, ...]) -> WindowedDataset:
    """Slide a lookback window over the rows; targets are the next
    `horizon` rows restricted to the target features."""
    if lookback < 1 or horizon < 1:
        raise ValueError(f"lookback and horizon must be >= 1, got {lookback}, {horizon}")
    if series.split is None:
        raise ValueError("windows are built per split; run chrono_split first")
    d = series.values.shape[1]
    idx = np.asarray(target_indices, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("need at least one target feature")
    if (idx < 0).any() or (idx >= d).any():
        raise ValueError(
            f"target indices {list(target_indices)} out of range for {d} features")
    n = series.n_rows
    n_windows = n - lookback - horizon + 1
    if n_windows < 1:
        raise ValueError(
            f"{series.client_id} {series.split}: {n} rows cannot fit one "
            f"window of lookback {lookback} plus horizon {horizon}")
    rows = np.arange(n_windows)[:, None]
    inputs = series.values[rows + np.arange(lookback)[None, :]]
    targets = series.values[rows + lookback + np.arange(horizon)[None, :]][:, :, idx]
    return WindowedDataset(
        client_id=series.client_id,
        split=series.split,
        inputs=np.ascontiguousarray(inputs, dtype=np.float32),
        targets=np.ascontiguousarray(targets, dtype=np.float32),
        target_indices=tuple(int(i) for i in idx),
    )
