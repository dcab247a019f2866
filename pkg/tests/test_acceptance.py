"""Acceptance gate: one test per headline guarantee, printed as it runs.

The multi-seed comparison runs dominate the clock; they are shared
session fixtures so the whole module costs one three-setting study,
one fine-tuning study, and a handful of small sweeps.
"""

import dataclasses
import json
import math
import statistics
import time

import numpy as np
import pytest

from fedcast.data import (
    SyntheticSpec,
    chrono_split,
    fit_scaler,
    generate_client,
    kl_matrix,
    make_windows,
    transform,
)
from fedcast.experiment import ExperimentConfig, build_clients, run_experiment
from fedcast.fl import (
    ClientUpdate,
    FedAdam,
    FedAvg,
    FedAvgM,
    FedNova,
    ServerState,
    aggregate,
    evaluate_forecasts,
)
from fedcast.metrics import s_inference, s_train, sustainability
from fedcast.nn import (
    LstmConfig,
    backward,
    forward,
    init_params,
    make_optimizer,
    train_epochs,
)
from fedcast.outliers import IsolationForest, ZScore, apply_outliers, detect, forest_scores

from test_nn_backward import RTOL, ATOL, finite_difference_grads, random_instance

SEEDS10 = tuple(range(10))
QUARTER_PHASES = tuple(k * math.pi / 2 / 7 for k in range(7))


def sign_test_p(wins: int, trials: int) -> float:
    """One-sided binomial tail: chance of >= wins under a fair coin."""
    return sum(math.comb(trials, k) for k in range(wins, trials + 1)) / 2.0 ** trials


def comparison_config() -> ExperimentConfig:
    return ExperimentConfig(
        n_clients=7, days=2.5, sample_period_s=90.0,
        rounds=10, epochs=3, seeds=SEEDS10, horizons=(1,),
        noise_std=0.05, phase_offsets=QUARTER_PHASES)


@pytest.fixture(scope="session")
def comparison_report():
    t0 = time.perf_counter()
    report = run_experiment(comparison_config(),
                            settings=("individual", "centralized", "federated"))
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def finetune_report():
    config = ExperimentConfig(
        n_clients=7, days=2.5, sample_period_s=90.0,
        hidden_width=32, ffn_width=16,
        rounds=10, epochs=3, seeds=SEEDS10, horizons=(1,),
        finetune=True, noise_std=0.05)
    return run_experiment(config, settings=("federated",))


def test_sustainability_closed_form():
    cases = {
        "federated": ((1.385, 14.06, 217.0, 0.03), (19.27, 1.57, 30.24)),
        "centralized": ((1.43, 15.5, 16531.0, 0.03), (83.43, 1.58, 132.0)),
    }
    lines = []
    for label, ((e_val, c_tr, ds, c_inf), (want_tr, want_inf, want_s)) in cases.items():
        got_tr = s_train(e_val, c_tr, ds)
        got_inf = s_inference(e_val, c_inf)
        got_s = sustainability(got_tr, got_inf)
        assert got_tr == pytest.approx(want_tr, rel=0.01)
        assert got_inf == pytest.approx(want_inf, rel=0.01)
        assert got_s == pytest.approx(want_s, rel=0.02)
        lines.append(f"{label} {got_tr:.2f}/{got_inf:.3f}/{got_s:.2f}")
    print(f"PASS sustainability closed form: {'; '.join(lines)}")


def test_bptt_matches_finite_differences_on_many_instances():
    t0 = time.perf_counter()
    n_instances = 24
    for seed in range(n_instances):
        cfg, params, window, target = random_instance(seed)
        _, cache = forward(params, window)
        analytic = backward(params, cache, target).flatten()
        numeric = finite_difference_grads(cfg, params, window, target)
        np.testing.assert_allclose(analytic, numeric, rtol=RTOL, atol=ATOL)
    wall = time.perf_counter() - t0
    assert wall < 30.0
    print(f"PASS gradient check: {n_instances} random instances in {wall:.1f}s")


def test_aggregation_identities_hold_exactly():
    cfg = LstmConfig(input_dim=3, target_dim=2, lstm_layers=1, hidden_width=6,
                     ffn_layers=1, ffn_width=5, lookback=4, horizon=2)
    g = init_params(cfg, seed=3)
    n = g.data.size
    rng = np.random.default_rng(11)
    w = g.flatten().astype(np.float64)

    def update(cid, local, contribution, tau=5):
        return ClientUpdate(client_id=cid, delta=np.asarray(local, np.float64) - w,
                            contribution=float(contribution), tau=tau,
                            train_loss=0.0, flops=0.0, window_passes=1)

    locals_ = [w + rng.standard_normal(n) for _ in range(3)]
    weights = (1.0, 2.0, 3.0)

    fixed = aggregate(ServerState(params=g),
                      [update(f"c{i}", w, c) for i, c in enumerate(weights)], FedAvg())
    assert np.array_equal(fixed.params.data, g.data)

    avg = aggregate(ServerState(params=g),
                    [update(f"c{i}", l, c) for i, (l, c) in enumerate(zip(locals_, weights))],
                    FedAvg())
    nova = aggregate(ServerState(params=g),
                     [update(f"c{i}", l, c, tau=7) for i, (l, c) in enumerate(zip(locals_, weights))],
                     FedNova())
    momentum0 = aggregate(ServerState(params=g),
                          [update(f"c{i}", l, c) for i, (l, c) in enumerate(zip(locals_, weights))],
                          FedAvgM(beta=0.0))
    scaled = aggregate(ServerState(params=g),
                       [update(f"c{i}", l, 10.0 * c) for i, (l, c) in enumerate(zip(locals_, weights))],
                       FedAvg())
    adam_noop = aggregate(ServerState(params=g),
                          [update(f"c{i}", w, c) for i, c in enumerate(weights)], FedAdam())

    for other in (nova, momentum0, scaled):
        assert np.max(np.abs(other.params.data.astype(np.float64)
                             - avg.params.data.astype(np.float64))) <= 1e-12
    assert np.array_equal(adam_noop.params.data, g.data)
    print("PASS aggregation identities: fixed point, nova/tau, beta=0, "
          "scale invariance, adam no-op")


def test_federated_beats_individual_and_sustains_less(comparison_report):
    report, wall = comparison_report
    ind, fed, s_wins = [], [], 0
    for s in map(str, SEEDS10):
        blk = report["per_seed"][s]
        ind.append(blk["individual"]["1"]["mean"]["test_nrmse"])
        fed.append(blk["federated"]["1"]["mean"]["test_nrmse"])
        s_wins += (blk["federated"]["1"]["sustainability"]["s"]
                   < blk["centralized"]["1"]["sustainability"]["s"])
    wins = sum(f < i for f, i in zip(fed, ind))
    p = sign_test_p(wins, len(SEEDS10))
    assert statistics.mean(fed) < statistics.mean(ind)
    assert p < 0.05
    assert s_wins == len(SEEDS10)
    print(f"PASS setting comparison: fed NRMSE {statistics.mean(fed):.4f} < "
          f"ind {statistics.mean(ind):.4f}, {wins}/10 seeds (p={p:.4f}), "
          f"fed S < cen S {s_wins}/10, wall {wall / 60:.1f} min")


def test_error_is_nondecreasing_in_horizon():
    config = ExperimentConfig(
        n_clients=2, days=1.0, sample_period_s=120.0,
        hidden_width=16, ffn_width=8,
        rounds=10, epochs=3, seeds=SEEDS10, horizons=(1, 5, 10),
        events_per_day=1.0, noise_std=0.05)
    report = run_experiment(config, settings=("individual",))
    maes = [report["aggregate"]["individual"][str(t)]["test_mae"]["mean"]
            for t in (1, 5, 10)]
    assert maes[0] <= maes[1] <= maes[2]
    print(f"PASS horizon degradation: mean test MAE "
          f"{maes[0]:.2f} <= {maes[1]:.2f} <= {maes[2]:.2f} over T=1,5,10")


def test_outlier_pipeline_flags_and_repairs_spikes():
    cfg = LstmConfig(input_dim=11, target_dim=5, lstm_layers=1, hidden_width=24,
                     ffn_layers=1, ffn_width=12, lookback=6, horizon=1)
    targets = (0, 1, 2, 3, 4)

    def mae_after_training(train_series, test_series, method, seed):
        corrected, _ = apply_outliers(train_series, method)
        scaler = fit_scaler(corrected)
        tr = make_windows(transform(scaler, corrected), cfg.lookback, cfg.horizon, targets)
        te = make_windows(transform(scaler, test_series), cfg.lookback, cfg.horizon, targets)
        params = init_params(cfg, seed=seed)
        params, _, _ = train_epochs(params, tr.inputs, tr.targets, 30,
                                    make_optimizer("adam", 1e-3), batch_size=128)
        mae, _ = evaluate_forecasts(params, te, scaler)
        return mae

    recalls, clean_ratios = [], []
    spiked_base, spiked_fixed = [], []
    for seed in range(10):
        spec = SyntheticSpec(n_clients=1, days=2.0, sample_period_s=90.0,
                             events_per_day=0.0, weekly_amplitude=0.0,
                             noise_std=0.02, seed=seed)
        train, val, test = chrono_split(generate_client(spec, 0))
        rng = np.random.default_rng([seed, 77])
        n = train.n_rows
        hit = rng.choice(n, size=max(1, round(0.01 * n)), replace=False)
        spiked_values = train.values.copy()
        spiked_values[hit] += 10.0 * train.values.std(axis=0)
        spiked = dataclasses.replace(train, values=spiked_values)

        flagged = detect(spiked, ZScore()).any(axis=1)
        recall = flagged[hit].mean()
        recalls.append(recall)
        assert recall >= 0.9

        forest = IsolationForest(seed=seed)
        scores = forest_scores(spiked.values, forest)
        clean_rows = np.setdiff1d(np.arange(n), hit)
        assert scores[hit].mean() > scores[clean_rows].mean()

        val_bytes, test_bytes = val.values.tobytes(), test.values.tobytes()
        apply_outliers(spiked, forest)
        assert val.values.tobytes() == val_bytes
        assert test.values.tobytes() == test_bytes

        clean_ratios.append(mae_after_training(train, test, forest, seed)
                            / mae_after_training(train, test, None, seed))
        spiked_base.append(mae_after_training(spiked, test, None, seed))
        spiked_fixed.append(mae_after_training(spiked, test, forest, seed))

    mean_clean_ratio = statistics.mean(clean_ratios)
    assert mean_clean_ratio <= 1.05
    assert statistics.mean(spiked_fixed) <= 1.05 * statistics.mean(spiked_base)
    assert statistics.mean(spiked_fixed) < statistics.mean(spiked_base)
    print(f"PASS outlier pipeline: recall {statistics.mean(recalls):.2f}, "
          f"clean MAE ratio {mean_clean_ratio:.3f}, spiked MAE "
          f"{statistics.mean(spiked_base):.2f} -> {statistics.mean(spiked_fixed):.2f}")


def test_local_finetuning_reduces_client_error(finetune_report):
    base, tuned = [], []
    for s in map(str, SEEDS10):
        cell = finetune_report["per_seed"][s]["federated"]["1"]["mean"]
        base.append(cell["test_nrmse"])
        tuned.append(cell["finetuned_test_nrmse"])
    wins = sum(t < b for t, b in zip(tuned, base))
    p = sign_test_p(wins, len(SEEDS10))
    assert statistics.mean(tuned) < statistics.mean(base)
    assert p < 0.05
    print(f"PASS fine-tuning: NRMSE {statistics.mean(base):.4f} -> "
          f"{statistics.mean(tuned):.4f}, {wins}/10 seeds (p={p:.4f})")


def test_kl_matrix_flags_disjoint_operating_ranges():
    spec = SyntheticSpec(n_clients=3, days=1.0, sample_period_s=60.0,
                         base_rates=(100.0, 700.0, 5000.0),
                         events_per_day=0.0, noise_std=0.05, seed=0)
    values = [generate_client(spec, k).values for k in range(3)]
    matrix = kl_matrix(values)
    assert np.all(np.abs(np.diag(matrix)) <= 1e-8)
    assert np.all(matrix >= 0.0)
    assert np.all(np.isfinite(matrix))
    off = matrix.copy()
    np.fill_diagonal(off, -np.inf)
    pair = np.unravel_index(np.argmax(off), off.shape)
    assert set(pair) == {0, 2}
    print(f"PASS divergence matrix: zero diagonal, max pair {sorted(set(pair))} "
          f"at {matrix[pair]:.2f}")


def test_settings_perform_equal_training_passes(comparison_report):
    report, _ = comparison_report
    config = comparison_config()
    checked = 0
    for s, seed in zip(map(str, SEEDS10), SEEDS10):
        clients = build_clients(config, seed=seed, horizon=1).clients
        for setting in ("individual", "centralized", "federated"):
            passes = report["per_seed"][s][setting]["1"]["window_passes"]
            for cid, n_passes in passes.items():
                expected = config.rounds * config.epochs * clients[cid].train.n_windows
                assert n_passes == expected
                checked += 1
    print(f"PASS fairness accounting: {checked} client cells at exactly "
          f"rounds*epochs passes per training window")


def test_reports_are_deterministic_under_parallelism(tmp_path):
    from fedcast.cli import main

    config_text = (
        "[experiment]\n"
        "n_clients = 2\ndays = 0.2\nsample_period_s = 60\n"
        "hidden_width = 12\nffn_width = 8\nlookback = 6\n"
        "rounds = 2\nepochs = 1\nseeds = 0, 1\nhorizons = 1\nbatch_size = 16\n")
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(config_text)

    hashes, bodies = [], []
    for name, extra in (("a", []), ("b", []), ("c", ["--parallel", "2"])):
        out = tmp_path / name
        assert main(["run", "--config", str(cfg), "--out", str(out), *extra]) == 0
        body = (out / "report.json").read_bytes()
        bodies.append(body)
        hashes.append(json.loads(body)["report_hash"])
    assert hashes[0] == hashes[1] == hashes[2]
    assert bodies[0] == bodies[1] == bodies[2]
    print(f"PASS determinism: serial x2 and parallel runs share hash {hashes[0][:12]}")
