"""Report files: canonical JSON, stable hashes, CSV tables, plot data.

The JSON form is canonical: keys sorted, no whitespace, floats printed
with 17 significant digits. Parsing a report file and re-emitting it
reproduces the bytes, and the embedded hash can be recomputed from the
parsed content, so result files are self-verifying artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np


def _float_repr(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"reports cannot contain non-finite numbers, got {value}")
    return format(value, ".17g")


def _canon(value, out: list) -> None:
    # bool before int: bool is an int subclass
    if value is None:
        out.append("null")
    elif isinstance(value, (bool, np.bool_)):
        out.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        out.append(_float_repr(float(value)))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        keys = list(value.keys())
        if any(not isinstance(key, str) for key in keys):
            raise TypeError("report dict keys must be strings")
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate report keys")
        out.append("{")
        for i, key in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _canon(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canon(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def canonical_json(value) -> str:
    out: list[str] = []
    _canon(value, out)
    return "".join(out)


def content_hash(value) -> str:
    """Hex digest of the canonical JSON form."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def report_hash(report: dict) -> str:
    """The report's own hash, recomputable from a parsed report file."""
    return content_hash({key: value for key, value in report.items()
                         if key != "report_hash"})


def _cell_csv(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return _float_repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell_csv(cell) for cell in row])


METRIC_COLUMNS = ("val_mae", "val_nrmse", "test_mae", "test_nrmse",
                  "finetuned_test_mae", "finetuned_test_nrmse")


def emit_report(report: dict, out_dir, formats=("json", "csv")) -> dict[str, Path]:
    """Write report.json and/or report.csv; returns the paths written.

    The CSV holds one row per (seed, setting, client, horizon) with the
    metric columns; fields that a run did not produce stay blank.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(canonical_json(report) + "\n", encoding="utf-8")
        written["json"] = path
    if "csv" in formats:
        rows = []
        seeds = report["config"]["seeds"]
        horizons = report["config"]["horizons"]
        for seed in seeds:
            for setting in report["settings"]:
                per_setting = report["per_seed"][str(seed)][setting]
                client_ids = sorted(per_setting[str(horizons[0])]["clients"])
                for client_id in client_ids:
                    for horizon in horizons:
                        block = per_setting[str(horizon)]["clients"][client_id]
                        rows.append([seed, setting, client_id, horizon]
                                    + [block.get(m) for m in METRIC_COLUMNS])
        path = out_dir / "report.csv"
        _write_csv(path, ["seed", "setting", "client", "horizon",
                          *METRIC_COLUMNS], rows)
        written["csv"] = path
    return written


def emit_plotdata(report: dict, out_dir) -> dict[str, Path]:
    """Plot-ready series: error versus forecast horizon, per setting."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for setting in report["settings"]:
        for horizon in report["config"]["horizons"]:
            entry = report["aggregate"][setting][str(horizon)]
            rows.append([setting, horizon,
                         entry["test_mae"]["mean"], entry["test_mae"]["std"],
                         entry["test_nrmse"]["mean"], entry["test_nrmse"]["std"]])
    path = out_dir / "horizon_curve.csv"
    _write_csv(path, ["setting", "horizon", "test_mae_mean", "test_mae_std",
                      "test_nrmse_mean", "test_nrmse_std"], rows)
    return {"horizon_curve": path}


def emit_comparison(variants: dict[str, dict], dimension: str,
                    out_dir) -> Path:
    """One CSV row per (variant, setting, horizon) from variant reports.

    `variants` maps a swept value (aggregation strategy, outlier method,
    cohort size per round) to its full report.
    """
    rows = []
    for name, report in variants.items():
        for setting in report["settings"]:
            for horizon in report["config"]["horizons"]:
                entry = report["aggregate"][setting][str(horizon)]
                rows.append([
                    name, setting, horizon,
                    entry["test_mae"]["mean"], entry["test_mae"]["std"],
                    entry["test_nrmse"]["mean"], entry["test_nrmse"]["std"],
                    entry["s"]["mean"], entry["s"]["std"],
                ])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{dimension}_comparison.csv"
    _write_csv(path, [dimension, "setting", "horizon",
                      "test_mae_mean", "test_mae_std",
                      "test_nrmse_mean", "test_nrmse_std",
                      "s_mean", "s_std"], rows)
    return path


def emit_kl_matrix(client_ids: list[str], matrix: np.ndarray, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [[cid, *matrix[i]] for i, cid in enumerate(client_ids)]
    path = out_dir / "kl_matrix.csv"
    _write_csv(path, ["client", *client_ids], rows)
    return path


def emit_deletion_table(table: dict[str, dict[str, float]], out_dir,
                        name: str = "deletion.csv") -> Path:
    """Rows: full cohort then each exclusion; columns: clients + average."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = {key for row in table.values() for key in row} - {"average"}
    columns = [*sorted(ids), "average"]
    labels = sorted(table, key=lambda label: (label != "all", label))
    rows = [[label, *(table[label].get(col) for col in columns)] for label in labels]
    path = out_dir / name
    _write_csv(path, ["cohort", *columns], rows)
    return path
