"""Round orchestration for the three training settings.

Federated: rounds of select, broadcast, local training, aggregate.
Individual: each client trains its own model, reported on the same
round grid. Centralized: one model on the pooled training windows.
All three perform rounds * epochs passes over every training sample,
so error and energy comparisons are like-for-like.

Clients may train in parallel within a round; updates are aggregated
in ascending client-id order either way, so parallelism cannot change
the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data.scaling import Scaler, inverse_transform_targets
from ..data.windows import WindowedDataset
from ..metrics import JOULES_PER_FLOP, EnergyLedger, mae, nrmse
from ..nn import ModelParams, OptimizerState, predict, serialized_size_bytes, train_epochs
from .aggregation import AggregationStrategy, ServerState, aggregate
from .client import ClientState, ClientUpdate, client_update
from .selection import SelectionPolicy, select_clients


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    selected: tuple[str, ...]
    mean_train_loss: float
    val_nrmse: dict[str, float]      # current model scored on each client's val split
    window_passes: dict[str, int]    # training passes this round, per client
    bytes_transmitted: int           # model download + upload for the round
    cumulative_train_flops: float


def evaluate_forecasts(params: ModelParams, dataset: WindowedDataset,
                       scaler: Scaler | None = None) -> tuple[float, float]:
    """(MAE, NRMSE) of the model on one window set.

    With a scaler, errors are computed on the original measurement
    scale, which is where NRMSE's mean normalizer is meaningful.
    """
    pred = predict(params, dataset.inputs).astype(np.float64)
    truth = dataset.targets.astype(np.float64)
    if scaler is not None:
        pred = inverse_transform_targets(scaler, dataset.target_indices, pred)
        truth = inverse_transform_targets(scaler, dataset.target_indices, truth)
    return mae(pred, truth), nrmse(pred, truth)


def _as_client_map(clients) -> dict[str, ClientState]:
    if isinstance(clients, dict):
        mapping = dict(clients)
    else:
        mapping = {c.client_id: c for c in clients}
        if len(mapping) != len(clients):
            raise ValueError("duplicate client ids")
    if not mapping:
        raise ValueError("need at least one client")
    return mapping


def _val_errors(params: ModelParams,
                clients: dict[str, ClientState]) -> dict[str, float]:
    return {cid: evaluate_forecasts(params, c.val, c.scaler)[1]
            for cid, c in sorted(clients.items())}


def _train_selected(params: ModelParams, clients: dict[str, ClientState],
                    selected: tuple[str, ...], epochs: int,
                    parallel: int) -> list[ClientUpdate]:
    if parallel <= 1 or len(selected) <= 1:
        return [client_update(params, clients[cid], epochs) for cid in selected]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        futures = {cid: pool.submit(client_update, params, clients[cid], epochs)
                   for cid in selected}
        return [futures[cid].result() for cid in selected]


def run_federated(initial: ModelParams, clients, rounds: int, epochs: int,
                  strategy: AggregationStrategy, policy: SelectionPolicy,
                  seed: int, joules_per_flop: float = JOULES_PER_FLOP,
                  parallel: int = 1,
                  ) -> tuple[ModelParams, list[RoundReport], EnergyLedger]:
    """Select, broadcast, train locally, aggregate, for `rounds` rounds.

    The data-transmission term prices the per-round payload: one
    serialized model. Per-round byte counts (selected clients times
    download plus upload) accumulate in the reports.
    """
    client_map = _as_client_map(clients)
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    server = ServerState(params=initial.copy())
    model_bytes = serialized_size_bytes(initial.config)
    reports: list[RoundReport] = []
    total_flops = 0.0
    for round_index in range(rounds):
        selected = select_clients(client_map.keys(), policy, round_index, seed)
        updates = _train_selected(server.params, client_map, selected, epochs,
                                  parallel)
        server = aggregate(server, updates, strategy)
        total_flops += sum(u.flops for u in updates)
        reports.append(RoundReport(
            round_index=round_index,
            selected=selected,
            mean_train_loss=float(np.mean([u.train_loss for u in updates])),
            val_nrmse=_val_errors(server.params, client_map),
            window_passes={u.client_id: u.window_passes for u in updates},
            bytes_transmitted=len(selected) * 2 * model_bytes,
            cumulative_train_flops=total_flops,
        ))
    ledger = EnergyLedger(train_flops=total_flops,
                          ds_kb=model_bytes / 1000.0,
                          joules_per_flop=joules_per_flop)
    return server.params, reports, ledger


def run_individual(initial: ModelParams, clients, rounds: int, epochs: int,
                   joules_per_flop: float = JOULES_PER_FLOP,
                   ) -> dict[str, tuple[ModelParams, list[RoundReport], EnergyLedger]]:
    """Every client trains alone from the same starting point.

    Reported on the federated round grid (rounds of `epochs` epochs)
    so learning curves are comparable; nothing is transmitted, so the
    data term is zero.
    """
    client_map = _as_client_map(clients)
    out: dict[str, tuple[ModelParams, list[RoundReport], EnergyLedger]] = {}
    for cid, client in sorted(client_map.items()):
        params = initial.copy()
        reports: list[RoundReport] = []
        total_flops = 0.0
        for round_index in range(rounds):
            params, client.opt_state, stats = train_epochs(
                params, client.train.inputs, client.train.targets, epochs,
                client.opt_state, batch_size=client.batch_size)
            total_flops += stats.flops
            reports.append(RoundReport(
                round_index=round_index,
                selected=(cid,),
                mean_train_loss=stats.final_epoch_loss,
                val_nrmse={cid: evaluate_forecasts(params, client.val,
                                                   client.scaler)[1]},
                window_passes={cid: stats.window_passes},
                bytes_transmitted=0,
                cumulative_train_flops=total_flops,
            ))
        ledger = EnergyLedger(train_flops=total_flops, ds_kb=0.0,
                              joules_per_flop=joules_per_flop)
        out[cid] = (params, reports, ledger)
    return out


def run_centralized(initial: ModelParams, clients, opt_state: OptimizerState,
                    rounds: int, epochs: int, ds_kb: float,
                    joules_per_flop: float = JOULES_PER_FLOP,
                    batch_size: int = 128,
                    ) -> tuple[ModelParams, list[RoundReport], EnergyLedger]:
    """One model on the pooled training windows of every client.

    Windows stay in their per-client scale (each client standardized
    its own data before pooling); concatenation order is ascending
    client id. ds_kb prices shipping the raw training data to the
    server and is the caller's to compute from row counts.
    """
    client_map = _as_client_map(clients)
    ordered = sorted(client_map.items())
    inputs = np.concatenate([c.train.inputs for _, c in ordered])
    targets = np.concatenate([c.train.targets for _, c in ordered])
    params = initial.copy()
    reports: list[RoundReport] = []
    total_flops = 0.0
    all_ids = tuple(cid for cid, _ in ordered)
    for round_index in range(rounds):
        params, opt_state, stats = train_epochs(
            params, inputs, targets, epochs, opt_state, batch_size=batch_size)
        total_flops += stats.flops
        reports.append(RoundReport(
            round_index=round_index,
            selected=all_ids,
            mean_train_loss=stats.final_epoch_loss,
            val_nrmse=_val_errors(params, client_map),
            window_passes={cid: epochs * c.train.n_windows for cid, c in ordered},
            bytes_transmitted=0,
            cumulative_train_flops=total_flops,
        ))
    ledger = EnergyLedger(train_flops=total_flops, ds_kb=ds_kb,
                          joules_per_flop=joules_per_flop)
    return params, reports, ledger


def deletion_study(build_clients: Callable[[], dict[str, ClientState]],
                   initial: ModelParams, rounds: int, epochs: int,
                   strategy: AggregationStrategy, seed: int,
                   ) -> dict[str, dict[str, float]]:
    """Test error per client for the full cohort and each single exclusion.

    Every run rebuilds fresh client states (optimizer memory must not
    leak between runs) and starts from the same initial weights. The
    excluded client's own test split is still scored: that is the
    question the study asks.
    """
    from .selection import All, Exclude

    ids = sorted(build_clients().keys())
    if len(ids) < 2:
        raise ValueError("a deletion study needs at least two clients")
    table: dict[str, dict[str, float]] = {}
    runs = [("all", All())] + [(f"without_{cid}", Exclude(cid)) for cid in ids]
    for label, policy in runs:
        clients = build_clients()
        params, _, _ = run_federated(initial, clients, rounds, epochs,
                                     strategy, policy, seed)
        row = {cid: evaluate_forecasts(params, clients[cid].test,
                                       clients[cid].scaler)[1]
               for cid in ids}
        row["average"] = float(np.mean([row[cid] for cid in ids]))
        table[label] = row
    return table
