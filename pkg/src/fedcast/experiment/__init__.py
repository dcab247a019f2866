"""Experiment configuration, per-seed pipelines, orchestration, reports."""

from .config import (
    EXECUTION_KEYS,
    OUTLIER_METHODS,
    SETTINGS,
    STRATEGIES,
    ExperimentConfig,
    default_config_text,
    parse_config,
    parse_config_text,
)
from .pipeline import PipelineResult, build_clients, client_distributions, load_source
from .reports import (
    canonical_json,
    content_hash,
    emit_comparison,
    emit_deletion_table,
    emit_kl_matrix,
    emit_plotdata,
    emit_report,
    report_hash,
)
from .runner import run_experiment

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "parse_config_text",
    "default_config_text",
    "SETTINGS",
    "STRATEGIES",
    "OUTLIER_METHODS",
    "EXECUTION_KEYS",
    "PipelineResult",
    "build_clients",
    "client_distributions",
    "load_source",
    "run_experiment",
    "canonical_json",
    "content_hash",
    "report_hash",
    "emit_report",
    "emit_plotdata",
    "emit_comparison",
    "emit_kl_matrix",
    "emit_deletion_table",
]
