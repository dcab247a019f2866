"""Experiment orchestration across seeds, settings and horizons.

One experiment = (data pipeline -> training setting -> evaluation ->
energy and sustainability accounting) for every seed and every
forecast horizon in the sweep, then mean/std aggregation across seeds.
The report is a plain dict of JSON-serializable values; given the same
config and seeds it is bit-identical, sequentially or in parallel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..fl import (
    ClientState,
    evaluate_forecasts,
    local_finetune,
    run_centralized,
    run_federated,
    run_individual,
)
from ..metrics import EnergyLedger, s_inference, s_train, seed_aggregate, sustainability
from ..nn import ModelParams, flops_per_window, init_params, make_optimizer
from .config import SETTINGS, ExperimentConfig
from .pipeline import build_clients

# cell["mean"] keys carried into the cross-seed aggregate
_AGGREGATED_METRICS = ("val_mae", "val_nrmse", "test_mae", "test_nrmse",
                       "finetuned_test_mae", "finetuned_test_nrmse")


def _metric_block(params: ModelParams, client: ClientState) -> dict:
    val_mae, val_nrmse = evaluate_forecasts(params, client.val, client.scaler)
    test_mae, test_nrmse = evaluate_forecasts(params, client.test, client.scaler)
    return {"val_mae": val_mae, "val_nrmse": val_nrmse,
            "test_mae": test_mae, "test_nrmse": test_nrmse}


def _mean_over_clients(blocks: dict[str, dict]) -> dict:
    keys = next(iter(blocks.values())).keys()
    return {key: float(np.mean([b[key] for b in blocks.values()])) for key in keys}


def _federated_cell(config: ExperimentConfig, clients: dict[str, ClientState],
                    initial: ModelParams, seed: int, parallel: int):
    params, rounds, ledger = run_federated(
        initial, clients, config.rounds, config.epochs,
        config.aggregation_strategy(), config.selection_policy(), seed=seed,
        joules_per_flop=config.joules_per_flop, parallel=parallel)
    blocks = {cid: _metric_block(params, c) for cid, c in sorted(clients.items())}
    if config.finetune:
        for cid, client in sorted(clients.items()):
            personal = local_finetune(
                params, client, config.epochs,
                make_optimizer(config.optimizer, config.learning_rate))
            ft_mae, ft_nrmse = evaluate_forecasts(personal, client.test,
                                                  client.scaler)
            blocks[cid]["finetuned_test_mae"] = ft_mae
            blocks[cid]["finetuned_test_nrmse"] = ft_nrmse
    passes: dict[str, int] = {cid: 0 for cid in clients}
    for report in rounds:
        for cid, n in report.window_passes.items():
            passes[cid] += n
    cell = {
        "clients": blocks,
        "mean": _mean_over_clients(blocks),
        "round_train_loss": [r.mean_train_loss for r in rounds],
        "round_val_nrmse": [float(np.mean(list(r.val_nrmse.values())))
                            for r in rounds],
        "window_passes": passes,
        "bytes_transmitted": sum(r.bytes_transmitted for r in rounds),
    }
    return cell, ledger


def _individual_cell(config: ExperimentConfig, clients: dict[str, ClientState],
                     initial: ModelParams):
    out = run_individual(initial, clients, config.rounds, config.epochs,
                         joules_per_flop=config.joules_per_flop)
    ledger = EnergyLedger(joules_per_flop=config.joules_per_flop)
    blocks = {}
    passes = {}
    for cid in sorted(clients):
        params, reports, client_ledger = out[cid]
        ledger = ledger + client_ledger
        blocks[cid] = _metric_block(params, clients[cid])
        passes[cid] = sum(r.window_passes[cid] for r in reports)
    per_round = [[out[cid][1][r] for cid in sorted(clients)]
                 for r in range(config.rounds)]
    cell = {
        "clients": blocks,
        "mean": _mean_over_clients(blocks),
        "round_train_loss": [float(np.mean([rep.mean_train_loss for rep in reps]))
                             for reps in per_round],
        "round_val_nrmse": [float(np.mean([rep.val_nrmse[rep.selected[0]]
                                           for rep in reps]))
                            for reps in per_round],
        "window_passes": passes,
        "bytes_transmitted": 0,
    }
    return cell, ledger


def _centralized_cell(config: ExperimentConfig, clients: dict[str, ClientState],
                      initial: ModelParams, ds_kb: float):
    params, rounds, ledger = run_centralized(
        initial, clients, make_optimizer(config.optimizer, config.learning_rate),
        config.rounds, config.epochs, ds_kb=ds_kb,
        joules_per_flop=config.joules_per_flop, batch_size=config.batch_size)
    blocks = {cid: _metric_block(params, c) for cid, c in sorted(clients.items())}
    passes = {cid: 0 for cid in clients}
    for report in rounds:
        for cid, n in report.window_passes.items():
            passes[cid] += n
    cell = {
        "clients": blocks,
        "mean": _mean_over_clients(blocks),
        "round_train_loss": [r.mean_train_loss for r in rounds],
        "round_val_nrmse": [float(np.mean(list(r.val_nrmse.values())))
                            for r in rounds],
        "window_passes": passes,
        "bytes_transmitted": 0,
    }
    return cell, ledger


def _run_cell(config: ExperimentConfig, setting: str, seed: int, horizon: int,
              client_parallel: int) -> dict:
    data = build_clients(config, seed, horizon)
    initial = init_params(config.lstm_config(horizon), seed=seed)
    if setting == "federated":
        cell, ledger = _federated_cell(config, data.clients, initial, seed,
                                       client_parallel)
    elif setting == "individual":
        cell, ledger = _individual_cell(config, data.clients, initial)
    else:
        cell, ledger = _centralized_cell(config, data.clients, initial,
                                         data.centralized_ds_kb)

    test_windows = sum(c.test.n_windows for c in data.clients.values())
    inference = EnergyLedger(
        inference_flops=float(flops_per_window(config.lstm_config(horizon)))
        * test_windows,
        joules_per_flop=config.joules_per_flop)
    ledger = ledger + inference

    e_val = cell["mean"]["val_nrmse"]
    e_test = cell["mean"]["test_nrmse"]
    weights = config.weights()
    s_tr = s_train(e_val, ledger.c_tr, ledger.ds_kb, weights)
    s_inf = s_inference(e_test, ledger.c_inf, weights,
                        strict=config.strict_inference)
    cell["energy"] = {
        "train_flops": ledger.train_flops,
        "inference_flops": ledger.inference_flops,
        "ds_kb": ledger.ds_kb,
        "c_tr_wh": ledger.c_tr,
        "c_inf_wh": ledger.c_inf,
    }
    cell["sustainability"] = {
        "s_train": s_tr,
        "s_inference": s_inf,
        "s": sustainability(s_tr, s_inf),
    }
    cell["outliers_flagged"] = {
        cid: int(report.total_flagged)
        for cid, report in sorted(data.outlier_reports.items())
    }
    return cell


def _seed_block(config: ExperimentConfig, seed: int, settings: tuple[str, ...],
                client_parallel: int) -> dict:
    block: dict[str, dict] = {setting: {} for setting in settings}
    for horizon in config.horizons:
        for setting in settings:
            try:
                cell = _run_cell(config, setting, seed, horizon, client_parallel)
            except Exception as exc:
                raise RuntimeError(
                    f"seed {seed}, setting {setting}, horizon {horizon}: "
                    f"{exc}") from exc
            block[setting][str(horizon)] = cell
    return block


def run_experiment(config: ExperimentConfig,
                   settings: tuple[str, ...] | None = None) -> dict:
    """Full sweep over seeds and horizons for one or more settings.

    Fine-tuning applies to the federated setting; the other settings
    have no global model to personalize. With config.parallel > 1,
    seeds run concurrently (each seed's computation is an isolated
    deterministic function, so the report is unchanged).
    """
    chosen = tuple(settings) if settings is not None else (config.setting,)
    for name in chosen:
        if name not in SETTINGS:
            raise ValueError(f"unknown setting {name!r}, expected one of {SETTINGS}")
    if len(set(chosen)) != len(chosen):
        raise ValueError("settings must be unique")

    seed_parallel = min(config.parallel, len(config.seeds))
    client_parallel = 1 if seed_parallel > 1 else config.parallel
    if seed_parallel > 1:
        with ThreadPoolExecutor(max_workers=seed_parallel) as pool:
            futures = [pool.submit(_seed_block, config, seed, chosen,
                                   client_parallel)
                       for seed in config.seeds]
            blocks = [future.result() for future in futures]
    else:
        blocks = [_seed_block(config, seed, chosen, client_parallel)
                  for seed in config.seeds]

    per_seed = {str(seed): block for seed, block in zip(config.seeds, blocks)}
    aggregate: dict[str, dict] = {}
    for setting in chosen:
        aggregate[setting] = {}
        for horizon in config.horizons:
            cells = [per_seed[str(seed)][setting][str(horizon)]
                     for seed in config.seeds]
            entry = {}
            for metric in _AGGREGATED_METRICS:
                if metric not in cells[0]["mean"]:
                    continue
                mean, std = seed_aggregate([c["mean"][metric] for c in cells])
                entry[metric] = {"mean": mean, "std": std}
            for metric in ("s_train", "s_inference", "s"):
                mean, std = seed_aggregate([c["sustainability"][metric]
                                            for c in cells])
                entry[metric] = {"mean": mean, "std": std}
            for metric in ("c_tr_wh", "c_inf_wh", "ds_kb"):
                mean, std = seed_aggregate([c["energy"][metric] for c in cells])
                entry[metric] = {"mean": mean, "std": std}
            aggregate[setting][str(horizon)] = entry

    from .reports import content_hash

    fingerprint = config.fingerprint()
    report = {
        "config": fingerprint,
        "config_hash": content_hash(fingerprint),
        "settings": list(chosen),
        "per_seed": per_seed,
        "aggregate": aggregate,
    }
    report["report_hash"] = content_hash(
        {key: value for key, value in report.items() if key != "report_hash"})
    return report
