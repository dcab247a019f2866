"""Outlier detection and flooring/capping on the training split only.

Detection never touches validation or test rows: the model should not
learn from corrupted extremes, but it must still be scored against the
true data distribution. Every entry point therefore insists on the
train split tag.

Three detectors are cell-level rules with explicit per-feature bounds
(z-score fences, interquartile fences, quantile floor/cap); the fourth
is a from-scratch isolation forest that scores whole rows by how few
random axis-aligned splits isolate them. Correction clamps flagged
cells into the bounds; since the forest has no fences of its own, its
rows are clamped to the quantile floor/cap bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data.series import RawSeries


@dataclass(frozen=True)
class ZScore:
    threshold: float = 3.0

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")


@dataclass(frozen=True)
class Iqr:
    k: float = 1.5

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")


@dataclass(frozen=True)
class IsolationForest:
    n_trees: int = 100
    subsample: int = 256
    contamination: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.subsample < 2:
            raise ValueError(f"subsample must be >= 2, got {self.subsample}")
        if not 0.0 < self.contamination < 0.5:
            raise ValueError(
                f"contamination must lie in (0, 0.5), got {self.contamination}")


@dataclass(frozen=True)
class FloorCap:
    lower_q: float = 0.01
    upper_q: float = 0.99

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower_q < self.upper_q <= 1.0:
            raise ValueError(
                f"need 0 <= lower_q < upper_q <= 1, got "
                f"({self.lower_q}, {self.upper_q})")


OutlierMethod = ZScore | Iqr | IsolationForest | FloorCap | None


@dataclass(frozen=True)
class OutlierReport:
    """What a correction pass did: flags and bounds per feature."""

    n_rows: int
    flagged_per_feature: np.ndarray  # int, shape (d,)
    floor: np.ndarray | None         # shape (d,); None when nothing was corrected
    cap: np.ndarray | None

    def __post_init__(self) -> None:
        if (self.flagged_per_feature > self.n_rows).any():
            raise ValueError("flagged counts cannot exceed the row count")

    @property
    def total_flagged(self) -> int:
        return int(self.flagged_per_feature.sum())


def _require_train(series: RawSeries) -> None:
    if series.split != "train":
        raise ValueError(
            f"outlier handling runs on the train split only, got "
            f"{series.split!r} for {series.client_id}")


def correction_bounds(series: RawSeries,
                      method: OutlierMethod) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature (floor, cap) the method corrects toward.

    Z-score and IQR expose their own fences; the forest has none, so it
    borrows the default quantile floor/cap.
    """
    _require_train(series)
    values = series.values
    if isinstance(method, ZScore):
        mean = values.mean(axis=0)
        std = values.std(axis=0)
        return mean - method.threshold * std, mean + method.threshold * std
    if isinstance(method, Iqr):
        q1 = np.quantile(values, 0.25, axis=0)  # linear interpolation
        q3 = np.quantile(values, 0.75, axis=0)
        spread = q3 - q1
        return q1 - method.k * spread, q3 + method.k * spread
    if isinstance(method, FloorCap):
        return (np.quantile(values, method.lower_q, axis=0),
                np.quantile(values, method.upper_q, axis=0))
    if isinstance(method, IsolationForest):
        fallback = FloorCap()
        return (np.quantile(values, fallback.lower_q, axis=0),
                np.quantile(values, fallback.upper_q, axis=0))
    raise ValueError(f"no correction bounds for method {method!r}")


def _c(n: int) -> float:
    """Expected unsuccessful-search path length in a tree of n points."""
    if n <= 1:
        return 0.0
    harmonic = math.log(n - 1) + np.euler_gamma
    return 2.0 * harmonic - 2.0 * (n - 1) / n


def _build_tree(rows: np.ndarray, depth: int, limit: int, rng: np.random.Generator):
    """Nodes are (feature, split, left, right); leaves are (None, size)."""
    m = rows.shape[0]
    if m <= 1 or depth >= limit:
        return (None, m)
    lo = rows.min(axis=0)
    hi = rows.max(axis=0)
    usable = np.flatnonzero(hi > lo)
    if usable.size == 0:
        return (None, m)  # all remaining rows identical
    feature = int(rng.choice(usable))
    split = float(rng.uniform(lo[feature], hi[feature]))
    below = rows[:, feature] < split
    return (feature, split,
            _build_tree(rows[below], depth + 1, limit, rng),
            _build_tree(rows[~below], depth + 1, limit, rng))


def _tree_depths(node, values: np.ndarray, idx: np.ndarray, depth: int,
                 out: np.ndarray) -> None:
    if node[0] is None:
        out[idx] = depth + _c(node[1])
        return
    feature, split, left, right = node
    below = values[idx, feature] < split
    _tree_depths(left, values, idx[below], depth + 1, out)
    _tree_depths(right, values, idx[~below], depth + 1, out)


def forest_scores(values: np.ndarray, method: IsolationForest) -> np.ndarray:
    """Anomaly score in (0, 1) per row; higher means easier to isolate.

    Trees grow on subsampled rows to a depth cap of ceil(log2(subsample));
    tree i draws from a generator seeded with seed + i, so per-tree
    parallelism cannot change the result.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to score, got shape {values.shape}")
    n = values.shape[0]
    psi = min(method.subsample, n)
    limit = max(1, math.ceil(math.log2(psi)))
    depth_sum = np.zeros(n, dtype=np.float64)
    all_rows = np.arange(n)
    scratch = np.empty(n, dtype=np.float64)
    for i in range(method.n_trees):
        rng = np.random.default_rng(method.seed + i)
        sample = rng.choice(n, size=psi, replace=False)
        tree = _build_tree(values[sample], 0, limit, rng)
        _tree_depths(tree, values, all_rows, 0, scratch)
        depth_sum += scratch
    mean_depth = depth_sum / method.n_trees
    return np.power(2.0, -mean_depth / _c(psi))


def detect(series: RawSeries, method: OutlierMethod) -> np.ndarray:
    """Boolean outlier mask, one entry per cell.

    Cell-level methods flag values outside their correction bounds; the
    forest flags the top `contamination` fraction of rows by anomaly
    score and broadcasts row flags across features. A series with no
    dispersion yields an empty mask for every method.
    """
    _require_train(series)
    values = series.values
    if method is None:
        return np.zeros(values.shape, dtype=bool)
    if isinstance(method, (ZScore, Iqr, FloorCap)):
        floor, cap = correction_bounds(series, method)
        return (values < floor) | (values > cap)
    if isinstance(method, IsolationForest):
        n = values.shape[0]
        scores = forest_scores(values, method)
        mask = np.zeros(values.shape, dtype=bool)
        if scores.max() - scores.min() < 1e-12:
            return mask  # indistinguishable rows, nothing to flag
        n_flag = math.ceil(method.contamination * n)
        worst = np.argsort(-scores, kind="stable")[:n_flag]
        mask[worst, :] = True
        return mask
    raise ValueError(f"unknown outlier method {method!r}")


def floor_cap(series: RawSeries, mask: np.ndarray,
              bounds: tuple[np.ndarray, np.ndarray]) -> tuple[RawSeries, OutlierReport]:
    """Clamp flagged cells into [floor, cap]; unflagged cells stay put."""
    _require_train(series)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != series.values.shape:
        raise ValueError(
            f"mask shape {mask.shape} does not match values {series.values.shape}")
    floor, cap = (np.asarray(b, dtype=np.float64) for b in bounds)
    if floor.shape != (series.values.shape[1],) or cap.shape != floor.shape:
        raise ValueError("bounds must hold one (floor, cap) pair per feature")
    if (floor > cap).any():
        raise ValueError("floor bounds exceed cap bounds")
    values = series.values.copy()
    clamped = np.clip(values, floor, cap)
    values[mask] = clamped[mask]
    report = OutlierReport(
        n_rows=series.n_rows,
        flagged_per_feature=mask.sum(axis=0),
        floor=floor.copy(),
        cap=cap.copy(),
    )
    return replace(series, values=values), report


def apply_outliers(series: RawSeries,
                   method: OutlierMethod) -> tuple[RawSeries, OutlierReport]:
    """One detect-and-correct pass over a training series."""
    _require_train(series)
    if method is None:
        report = OutlierReport(
            n_rows=series.n_rows,
            flagged_per_feature=np.zeros(series.values.shape[1], dtype=np.int64),
            floor=None,
            cap=None,
        )
        return series, report
    mask = detect(series, method)
    return floor_cap(series, mask, correction_bounds(series, method))
