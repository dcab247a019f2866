"""Per-seed dataset construction, from source to windowed client states.

Every client follows the same chain: zero out corrupted readings,
average down to the working resolution, split chronologically, correct
outliers on the training split only, standardize with statistics fitted
on that (corrected) training split, and cut sliding windows. All three
training settings consume clients built by this one chain, so their
comparisons never mix preprocessing variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import (
    RawSeries,
    chrono_split,
    downsample,
    fit_scaler,
    generate_cohort,
    load_csv,
    make_windows,
    transform,
    zero_corrupted,
)
from ..fl import ClientState
from ..nn import make_optimizer
from ..outliers import OutlierReport, apply_outliers
from .config import ExperimentConfig

# wire format of one transmitted sample: int64 timestamp + f32 features
BYTES_PER_ROW_FIXED = 8
BYTES_PER_FEATURE = 4


@dataclass(frozen=True)
class PipelineResult:
    clients: dict[str, ClientState]
    centralized_ds_kb: float          # shipping every train split to a server
    outlier_reports: dict[str, OutlierReport]
    train_rows: dict[str, int]


def load_source(config: ExperimentConfig, seed: int) -> list[RawSeries]:
    """The raw per-client series for one seed.

    CSV sources are seed-independent; the seed then only drives model
    initialization, training order and the forest's trees.
    """
    if config.source == "synthetic":
        return generate_cohort(config.synthetic_spec(seed))
    return [load_csv(Path(path)) for path in config.csv_paths]


def _prepare_client(config: ExperimentConfig, series: RawSeries, seed: int,
                    horizon: int) -> tuple[ClientState, OutlierReport, int]:
    cleaned, _ = zero_corrupted(series)
    if config.block > 1:
        cleaned = downsample(cleaned, config.block)
    train_raw, val_raw, test_raw = chrono_split(cleaned, config.fractions)
    train_corrected, report = apply_outliers(train_raw,
                                             config.outlier_method_for(seed))
    scaler = fit_scaler(train_corrected)
    windows = [
        make_windows(transform(scaler, part), config.lookback, horizon,
                     config.target_indices)
        for part in (train_corrected, val_raw, test_raw)
    ]
    client = ClientState(
        client_id=series.client_id,
        train=windows[0],
        val=windows[1],
        test=windows[2],
        opt_state=make_optimizer(config.optimizer, config.learning_rate),
        scaler=scaler,
        batch_size=config.batch_size,
    )
    return client, report, train_raw.n_rows


def build_clients(config: ExperimentConfig, seed: int,
                  horizon: int) -> PipelineResult:
    clients: dict[str, ClientState] = {}
    reports: dict[str, OutlierReport] = {}
    train_rows: dict[str, int] = {}
    for series in load_source(config, seed):
        cid = series.client_id
        if cid in clients:
            raise ValueError(f"duplicate client id {cid!r} in data source")
        try:
            client, report, rows = _prepare_client(config, series, seed, horizon)
        except ValueError as exc:
            raise ValueError(f"client {cid!r}: {exc}") from exc
        clients[cid] = client
        reports[cid] = report
        train_rows[cid] = rows
    row_bytes = BYTES_PER_ROW_FIXED + BYTES_PER_FEATURE * config.input_dim
    ds_kb = sum(train_rows.values()) * row_bytes / 1000.0
    return PipelineResult(clients=clients, centralized_ds_kb=ds_kb,
                          outlier_reports=reports, train_rows=train_rows)


def client_distributions(config: ExperimentConfig,
                         seed: int) -> tuple[tuple[str, ...], list[np.ndarray]]:
    """Cleaned, downsampled full-series values per client, for KL work."""
    ids, values = [], []
    for series in load_source(config, seed):
        cleaned, _ = zero_corrupted(series)
        if config.block > 1:
            cleaned = downsample(cleaned, config.block)
        ids.append(series.client_id)
        values.append(cleaned.values)
    return tuple(ids), values
