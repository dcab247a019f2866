"""Command-line experiment runner.

Each subcommand fixes one experimental dimension and sweeps it,
reusing the same pipeline and report machinery:

    run               one experiment as configured
    compare-settings  individual vs centralized vs federated
    aggregators       the six aggregation strategies, shared seeds
    outliers          correction methods, none through isolation forest
    select-clients    random cohorts of size 1..K per round
    deletion          full cohort vs each single-client exclusion
    finetune          federated training plus local personalization
    kl                pairwise client heterogeneity matrix
    synth-gen         write the synthetic cohort as per-client CSV files

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .data import generate_cohort, kl_matrix, write_csv
from .experiment import (
    OUTLIER_METHODS,
    STRATEGIES,
    ExperimentConfig,
    build_clients,
    canonical_json,
    client_distributions,
    content_hash,
    emit_comparison,
    emit_deletion_table,
    emit_kl_matrix,
    emit_plotdata,
    emit_report,
    parse_config,
    run_experiment,
)
from .fl import deletion_study
from .nn import init_params


def _seed_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be integers, got {text!r}")


def _load_config(args) -> ExperimentConfig:
    config = parse_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.parallel is not None:
        overrides["parallel"] = args.parallel
    return dataclasses.replace(config, **overrides) if overrides else config


def _out_dir(config: ExperimentConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(canonical_json(payload) + "\n", encoding="utf-8")


def _print_aggregate(report: dict) -> None:
    for setting in report["settings"]:
        for horizon in report["config"]["horizons"]:
            entry = report["aggregate"][setting][str(horizon)]
            line = (f"{setting:12s} T={horizon:<3d} "
                    f"test NRMSE {entry['test_nrmse']['mean']:.4f}"
                    f" +- {entry['test_nrmse']['std']:.4f}"
                    f"  S {entry['s']['mean']:.4f}")
            if "finetuned_test_nrmse" in entry:
                line += f"  finetuned {entry['finetuned_test_nrmse']['mean']:.4f}"
            print(line)


def _emit_standard(report: dict, config: ExperimentConfig) -> None:
    out = _out_dir(config)
    paths = emit_report(report, out)
    paths.update(emit_plotdata(report, out))
    _print_aggregate(report)
    print(f"report hash {report['report_hash']}")
    for path in paths.values():
        print(f"wrote {path}")


def _sweep(config: ExperimentConfig, dimension: str,
           variants: dict[str, ExperimentConfig],
           settings: tuple[str, ...] | None = None) -> int:
    reports = {name: run_experiment(cfg, settings=settings)
               for name, cfg in variants.items()}
    out = _out_dir(config)
    combined = {
        "sweep": dimension,
        "variants": reports,
    }
    combined["report_hash"] = content_hash(combined)
    json_path = out / f"{dimension}_sweep.json"
    _write_json(combined, json_path)
    csv_path = emit_comparison(reports, dimension, out)
    for name, report in reports.items():
        first = str(config.horizons[0])
        entry = report["aggregate"][report["settings"][0]][first]
        print(f"{name:18s} test NRMSE {entry['test_nrmse']['mean']:.4f}"
              f" +- {entry['test_nrmse']['std']:.4f}"
              f"  S {entry['s']['mean']:.4f}")
    print(f"report hash {combined['report_hash']}")
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_run(args) -> int:
    config = _load_config(args)
    _emit_standard(run_experiment(config), config)
    return 0


def _cmd_compare_settings(args) -> int:
    config = _load_config(args)
    report = run_experiment(
        config, settings=("individual", "centralized", "federated"))
    _emit_standard(report, config)
    return 0


def _cmd_aggregators(args) -> int:
    config = _load_config(args)
    variants = {name: dataclasses.replace(config, strategy=name,
                                          setting="federated")
                for name in STRATEGIES}
    return _sweep(config, "aggregator", variants)


def _cmd_outliers(args) -> int:
    config = _load_config(args)
    variants = {name: dataclasses.replace(config, outlier_method=name)
                for name in OUTLIER_METHODS}
    return _sweep(config, "outlier_method", variants)


def _cmd_select_clients(args) -> int:
    config = _load_config(args)
    cohort = config.cohort_size
    variants = {
        f"{k}_of_{cohort}": dataclasses.replace(
            config, setting="federated", selection="random", k_per_round=k)
        for k in range(1, cohort + 1)
    }
    return _sweep(config, "clients_per_round", variants)


def _cmd_deletion(args) -> int:
    config = _load_config(args)
    horizon = config.horizons[0]
    per_seed: dict[str, dict] = {}
    for seed in config.seeds:
        initial = init_params(config.lstm_config(horizon), seed=seed)
        table = deletion_study(
            lambda: build_clients(config, seed, horizon).clients,
            initial, config.rounds, config.epochs,
            config.aggregation_strategy(), seed)
        per_seed[str(seed)] = table
    labels = next(iter(per_seed.values())).keys()
    columns = next(iter(next(iter(per_seed.values())).values())).keys()
    mean_table = {
        label: {col: float(np.mean([per_seed[str(s)][label][col]
                                    for s in config.seeds]))
                for col in columns}
        for label in labels
    }
    out = _out_dir(config)
    payload = {"horizon": horizon, "per_seed": per_seed, "mean": mean_table}
    payload["report_hash"] = content_hash(payload)
    json_path = out / "deletion.json"
    _write_json(payload, json_path)
    csv_path = emit_deletion_table(mean_table, out)
    for label in sorted(mean_table, key=lambda l: (l != "all", l)):
        print(f"{label:16s} average test NRMSE {mean_table[label]['average']:.4f}")
    print(f"report hash {payload['report_hash']}")
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_finetune(args) -> int:
    config = dataclasses.replace(_load_config(args), finetune=True,
                                 setting="federated")
    report = run_experiment(config)
    _emit_standard(report, config)
    for horizon in config.horizons:
        entry = report["aggregate"]["federated"][str(horizon)]
        base = entry["test_nrmse"]["mean"]
        tuned = entry["finetuned_test_nrmse"]["mean"]
        print(f"T={horizon:<3d} fine-tuning changed mean test NRMSE by "
              f"{100.0 * (tuned - base) / base:+.1f}%")
    return 0


def _cmd_kl(args) -> int:
    config = _load_config(args)
    ids, values = client_distributions(config, config.seeds[0])
    matrix = kl_matrix(values)
    out = _out_dir(config)
    payload = {"clients": ids, "matrix": [list(map(float, row)) for row in matrix]}
    payload["report_hash"] = content_hash(payload)
    json_path = out / "kl_matrix.json"
    _write_json(payload, json_path)
    csv_path = emit_kl_matrix(ids, matrix, out)
    off = matrix + np.diag(np.full(len(ids), -np.inf))
    i, j = np.unravel_index(int(np.argmax(off)), off.shape)
    print(f"most divergent pair: {ids[i]} vs {ids[j]} "
          f"(KL {matrix[i, j]:.4f})")
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_synth_gen(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    spec = config.synthetic_spec(config.seeds[0])
    for series in generate_cohort(spec):
        path = out / f"{series.client_id}.csv"
        write_csv(series, path)
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "run": (_cmd_run, "run the configured experiment"),
    "compare-settings": (_cmd_compare_settings,
                         "individual vs centralized vs federated"),
    "aggregators": (_cmd_aggregators, "sweep the six aggregation strategies"),
    "outliers": (_cmd_outliers, "sweep outlier correction methods"),
    "select-clients": (_cmd_select_clients,
                       "sweep random cohort sizes 1..K per round"),
    "deletion": (_cmd_deletion, "full cohort vs each single exclusion"),
    "finetune": (_cmd_finetune, "federated training plus local fine-tuning"),
    "kl": (_cmd_kl, "pairwise client heterogeneity matrix"),
    "synth-gen": (_cmd_synth_gen, "write the synthetic cohort as CSV files"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedcast",
        description="Federated traffic-forecasting experiment runner")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text) in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="experiment config file")
        sub.add_argument("--out", help="output directory (overrides config)")
        sub.add_argument("--seeds", type=_seed_list,
                         help="comma-separated seed list (overrides config)")
        sub.add_argument("--parallel", type=int,
                         help="worker count for seeds/clients (overrides config)")
        sub.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:  # runtime failures exit 1, with context
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
