"""Raw per-client series: schema, CSV I/O, cleansing, downsampling, joins.

A series is one client's control-channel activity at a fixed sampling
cadence: a strictly increasing epoch-millisecond timestamp column plus
eleven scheduling features (resource-block means/variances for both link
directions, the scheduled-identifier count, modulation-and-coding
means/variances, and transport-block volumes in bits). Every feature is
nonnegative by definition, which is what the cleansing step leans on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

FEATURES = (
    "rb_dl_mean",
    "rb_dl_var",
    "rb_ul_mean",
    "rb_ul_var",
    "rnti_count",
    "mcs_dl_mean",
    "mcs_dl_var",
    "mcs_ul_mean",
    "mcs_ul_var",
    "tb_dl",
    "tb_ul",
)


@dataclass
class RawSeries:
    """One client's timestamped feature matrix.

    split is None for unsplit data and 'train' / 'val' / 'test' after
    chronological splitting; steps that must only ever see training data
    check it.
    """

    client_id: str
    timestamps: np.ndarray  # int64 epoch milliseconds, strictly increasing
    values: np.ndarray      # float64, shape (n, len(feature_names))
    feature_names: tuple[str, ...] = FEATURES
    split: str | None = None

    def __post_init__(self) -> None:
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        if self.timestamps.shape[0] != self.values.shape[0]:
            raise ValueError(
                f"{self.timestamps.shape[0]} timestamps but "
                f"{self.values.shape[0]} value rows")
        if self.values.shape[1] != len(self.feature_names):
            raise ValueError(
                f"{self.values.shape[1]} value columns but "
                f"{len(self.feature_names)} feature names")
        if self.timestamps.size > 1:
            gaps = np.diff(self.timestamps)
            if (gaps <= 0).any():
                bad = int(np.argmax(gaps <= 0))
                raise ValueError(
                    f"timestamps must be strictly increasing; row {bad + 1} "
                    f"({self.timestamps[bad + 1]}) does not follow {self.timestamps[bad]}")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise ValueError(
                f"unknown feature {name!r}; series has {list(self.feature_names)}")


def load_csv(path, feature_names: tuple[str, ...] = FEATURES,
             client_id: str | None = None) -> RawSeries:
    """Read one client's series; header must be timestamp plus the schema.

    Rows may arrive in any order and are sorted by timestamp; duplicate
    timestamps and unparseable cells are rejected with their location.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row")
        rows = [row for row in reader if row]

    expected = ["timestamp", *feature_names]
    if header != expected:
        missing = [c for c in expected if c not in header]
        extra = [c for c in header if c not in expected]
        detail = []
        if missing:
            detail.append(f"missing column(s) {missing}")
        if extra:
            detail.append(f"unexpected column(s) {extra}")
        if not detail:
            detail.append(f"column order must be {expected}")
        raise ValueError(f"{path}: bad header: " + "; ".join(detail))

    n_cols = len(expected)
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {n_cols}")

    try:
        timestamps = np.array([row[0] for row in rows], dtype=np.int64)
        values = np.array([row[1:] for row in rows], dtype=np.float64)
    except ValueError:
        for i, row in enumerate(rows):
            try:
                int(row[0])
            except ValueError:
                raise ValueError(
                    f"{path}: row {i + 2}: unparseable timestamp {row[0]!r}")
            for j, cell in enumerate(row[1:]):
                try:
                    float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {i + 2}, column {feature_names[j]!r}: "
                        f"unparseable cell {cell!r}")
        raise
    if values.size == 0:
        timestamps = np.zeros(0, dtype=np.int64)
        values = np.zeros((0, len(feature_names)), dtype=np.float64)

    order = np.argsort(timestamps, kind="stable")
    timestamps = timestamps[order]
    values = values[order]
    if timestamps.size > 1 and (np.diff(timestamps) == 0).any():
        dup = int(timestamps[np.argmax(np.diff(timestamps) == 0)])
        raise ValueError(f"{path}: duplicate timestamp {dup}")

    return RawSeries(
        client_id=client_id if client_id is not None else path.stem,
        timestamps=timestamps,
        values=values,
        feature_names=tuple(feature_names),
    )


def write_csv(series: RawSeries, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", *series.feature_names])
        for ts, row in zip(series.timestamps, series.values):
            writer.writerow([int(ts), *(f"{v:.17g}" for v in row)])


def zero_corrupted(series: RawSeries,
                   nonnegative: np.ndarray | None = None) -> tuple[RawSeries, int]:
    """Replace corrupted cells with 0 and report how many were touched.

    Corrupted means non-finite, or negative in a feature that cannot be
    negative by definition; with `nonnegative` omitted, every feature in
    the schema counts as such.
    """
    values = series.values.copy()
    bad = ~np.isfinite(values)
    if nonnegative is None:
        bad |= np.where(np.isfinite(values), values < 0.0, False)
    else:
        mask = np.asarray(nonnegative, dtype=bool)
        if mask.shape != (values.shape[1],):
            raise ValueError(
                f"nonnegative mask shape {mask.shape} does not match "
                f"{values.shape[1]} features")
        bad |= np.where(np.isfinite(values), values < 0.0, False) & mask
    values[bad] = 0.0
    return replace(series, values=values), int(bad.sum())


def downsample(series: RawSeries, block: int = 120) -> RawSeries:
    """Average non-overlapping blocks of `block` consecutive rows.

    The output row keeps the first timestamp of its block; a trailing
    partial block is dropped.
    """
    if block < 1:
        raise ValueError(f"block must be >= 1, got {block}")
    n_out = series.n_rows // block
    if n_out == 0:
        raise ValueError(
            f"series has {series.n_rows} rows, shorter than one block of {block}")
    trimmed = series.values[:n_out * block]
    values = trimmed.reshape(n_out, block, series.values.shape[1]).mean(axis=1)
    timestamps = series.timestamps[:n_out * block:block]
    return replace(series, timestamps=timestamps.copy(), values=values)


def merge_exogenous(series: RawSeries, exo_timestamps: np.ndarray,
                    exo_values: np.ndarray, exo_names: tuple[str, ...]) -> RawSeries:
    """Join extra columns onto the series by nearest-before timestamp.

    Each series row takes the exogenous row with the largest timestamp not
    after its own; a series row before the first exogenous timestamp is an
    error (there is nothing to carry forward).
    """
    exo_timestamps = np.asarray(exo_timestamps, dtype=np.int64)
    exo_values = np.asarray(exo_values, dtype=np.float64)
    if exo_values.ndim == 1:
        exo_values = exo_values[:, None]
    if exo_timestamps.shape[0] != exo_values.shape[0]:
        raise ValueError(
            f"{exo_timestamps.shape[0]} exogenous timestamps but "
            f"{exo_values.shape[0]} rows")
    if len(exo_names) != exo_values.shape[1]:
        raise ValueError(
            f"{len(exo_names)} exogenous names but {exo_values.shape[1]} columns")
    if exo_timestamps.size == 0:
        raise ValueError("exogenous data is empty")
    if (np.diff(exo_timestamps) <= 0).any():
        raise ValueError("exogenous timestamps must be strictly increasing")
    clash = set(exo_names) & set(series.feature_names)
    if clash:
        raise ValueError(f"exogenous name(s) {sorted(clash)} already in the series")

    idx = np.searchsorted(exo_timestamps, series.timestamps, side="right") - 1
    if (idx < 0).any():
        first = int(series.timestamps[idx < 0][0])
        raise ValueError(
            f"series timestamp {first} precedes the first exogenous "
            f"timestamp {int(exo_timestamps[0])}")
    values = np.concatenate([series.values, exo_values[idx]], axis=1)
    return replace(
        series,
        values=values,
        feature_names=tuple(series.feature_names) + tuple(exo_names),
    )
