"""Experiment configuration: file format, defaults, validation.

Config files are flat sectioned key-value text:

    [experiment]
    rounds = 5
    seeds = 0, 1, 2

    [model]
    hidden_width = 64

Section headers group keys for readability only; every key is globally
unique, so any key may appear under any (or no) header. Unknown keys
are rejected rather than ignored: a typo must not silently fall back
to a default. An empty file yields the full default configuration.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path

from ..fl import (
    All,
    Exclude,
    FedAdagrad,
    FedAdam,
    FedAvg,
    FedAvgM,
    FedNova,
    FedYogi,
    Random,
)
from ..metrics import SustainabilityWeights
from ..nn import LstmConfig
from ..outliers import FloorCap, IsolationForest, Iqr, ZScore
from ..data.synthetic import SyntheticSpec

SETTINGS = ("federated", "individual", "centralized")
OUTLIER_METHODS = ("none", "zscore", "iqr", "isolation_forest", "floorcap")
STRATEGIES = ("fedavg", "fedavgm", "fednova", "fedadagrad", "fedyogi", "fedadam")


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    return int(text.strip())


def _float(text: str) -> float:
    return float(text.strip())


def _str(text: str) -> str:
    return text.strip()


def _list(element):
    def parse(text: str) -> tuple:
        items = [part.strip() for part in text.split(",")]
        items = [part for part in items if part]
        if not items:
            raise ValueError("expected a non-empty comma-separated list")
        return tuple(element(part) for part in items)
    return parse


def _choice(*options):
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return value
    return parse


# key -> (section, parser). Field defaults live on ExperimentConfig.
_KEYS = {
    "setting": ("experiment", _choice(*SETTINGS)),
    "rounds": ("experiment", _int),
    "epochs": ("experiment", _int),
    "seeds": ("experiment", _list(_int)),
    "horizons": ("experiment", _list(_int)),
    "finetune": ("experiment", _bool),
    "strategy": ("experiment", _choice(*STRATEGIES)),
    "selection": ("experiment", _choice("all", "random", "exclude")),
    "k_per_round": ("experiment", _int),
    "exclude_id": ("experiment", _str),
    "input_dim": ("model", _int),
    "target_dim": ("model", _int),
    "lstm_layers": ("model", _int),
    "hidden_width": ("model", _int),
    "ffn_layers": ("model", _int),
    "ffn_width": ("model", _int),
    "lookback": ("model", _int),
    "optimizer": ("training", _choice("adam", "sgd")),
    "learning_rate": ("training", _float),
    "batch_size": ("training", _int),
    "source": ("data", _choice("synthetic", "csv")),
    "csv_paths": ("data", _list(_str)),
    "downsample_block": ("data", _int),
    "train_frac": ("data", _float),
    "val_frac": ("data", _float),
    "test_frac": ("data", _float),
    "n_clients": ("synthetic", _int),
    "days": ("synthetic", _float),
    "sample_period_s": ("synthetic", _float),
    "base_rates": ("synthetic", _list(_float)),
    "daily_amplitude": ("synthetic", _float),
    "weekly_amplitude": ("synthetic", _float),
    "phase_offsets": ("synthetic", _list(_float)),
    "events_per_day": ("synthetic", _float),
    "event_magnitude": ("synthetic", _float),
    "noise_std": ("synthetic", _float),
    "outlier_method": ("outliers", _choice(*OUTLIER_METHODS)),
    "zscore_threshold": ("outliers", _float),
    "iqr_k": ("outliers", _float),
    "forest_trees": ("outliers", _int),
    "forest_subsample": ("outliers", _int),
    "forest_contamination": ("outliers", _float),
    "quantile_low": ("outliers", _float),
    "quantile_high": ("outliers", _float),
    "avgm_beta": ("aggregation", _float),
    "server_lr": ("aggregation", _float),
    "server_beta1": ("aggregation", _float),
    "server_beta2": ("aggregation", _float),
    "server_tau": ("aggregation", _float),
    "alpha": ("sustainability", _float),
    "beta": ("sustainability", _float),
    "gamma": ("sustainability", _float),
    "alpha_inf": ("sustainability", _float),
    "beta_inf": ("sustainability", _float),
    "strict_inference": ("sustainability", _bool),
    "joules_per_flop": ("sustainability", _float),
    "output_dir": ("output", _str),
    "parallel": ("output", _int),
}

# execution knobs: they steer where and how fast results materialize,
# never what they are, so fingerprints and report hashes skip them
EXECUTION_KEYS = ("output_dir", "parallel")


@dataclass(frozen=True)
class ExperimentConfig:
    setting: str = "federated"
    rounds: int = 10
    epochs: int = 3
    seeds: tuple[int, ...] = tuple(range(10))
    horizons: tuple[int, ...] = tuple(range(1, 11))
    finetune: bool = False
    strategy: str = "fedavg"
    selection: str = "all"
    k_per_round: int = 0
    exclude_id: str = ""
    input_dim: int = 11
    target_dim: int = 5
    lstm_layers: int = 1
    hidden_width: int = 128
    ffn_layers: int = 1
    ffn_width: int = 64
    lookback: int = 10
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    batch_size: int = 128
    source: str = "synthetic"
    csv_paths: tuple[str, ...] = ()
    downsample_block: int = 0  # 0 resolves per source: synthetic 1, csv 120
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    n_clients: int = 7
    days: float = 3.0
    sample_period_s: float = 60.0
    base_rates: tuple[float, ...] = (100.0,)
    daily_amplitude: float = 0.8
    weekly_amplitude: float = 0.1
    phase_offsets: tuple[float, ...] = ()  # empty spreads phases evenly
    events_per_day: float = 0.5
    event_magnitude: float = 3.0
    noise_std: float = 0.05
    outlier_method: str = "none"
    zscore_threshold: float = 3.0
    iqr_k: float = 1.5
    forest_trees: int = 100
    forest_subsample: int = 256
    forest_contamination: float = 0.05
    quantile_low: float = 0.01
    quantile_high: float = 0.99
    avgm_beta: float = 0.9
    server_lr: float = 0.01
    server_beta1: float = 0.9
    server_beta2: float = 0.99
    server_tau: float = 1e-3
    alpha: float = 0.33
    beta: float = 0.33
    gamma: float = 0.33
    alpha_inf: float = 0.5
    beta_inf: float = 0.5
    strict_inference: bool = False
    joules_per_flop: float = 1e-9
    output_dir: str = "results"
    parallel: int = 1

    def __post_init__(self) -> None:
        if self.rounds < 0:
            raise ValueError(f"rounds must be >= 0, got {self.rounds}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")
        if any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be non-negative")
        if not self.horizons or any(t < 1 for t in self.horizons):
            raise ValueError("horizons must be a non-empty list of steps >= 1")
        if len(set(self.horizons)) != len(self.horizons):
            raise ValueError("horizons must be unique")
        if self.source == "csv" and not self.csv_paths:
            raise ValueError("source = csv requires csv_paths")
        if self.selection == "random":
            if not 1 <= self.k_per_round <= self.cohort_size:
                raise ValueError(
                    f"k_per_round must lie in [1, {self.cohort_size}], "
                    f"got {self.k_per_round}")
        if self.selection == "exclude" and not self.exclude_id:
            raise ValueError("selection = exclude requires exclude_id")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.downsample_block < 0:
            raise ValueError(f"downsample_block must be >= 0, got {self.downsample_block}")
        if self.parallel < 1:
            raise ValueError(f"parallel must be >= 1, got {self.parallel}")
        # constructing the derived objects runs their own validation
        self.weights()
        self.aggregation_strategy()
        self.outlier_method_for(seed=0)
        if self.source == "synthetic":
            self.synthetic_spec(seed=0)
        self.lstm_config(self.horizons[0])

    @property
    def cohort_size(self) -> int:
        return self.n_clients if self.source == "synthetic" else len(self.csv_paths)

    @property
    def block(self) -> int:
        """Downsampling block; raw 1 Hz feeds average to 2-minute bins."""
        if self.downsample_block > 0:
            return self.downsample_block
        return 1 if self.source == "synthetic" else 120

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_frac, self.val_frac, self.test_frac)

    @property
    def target_indices(self) -> tuple[int, ...]:
        return tuple(range(self.target_dim))

    def lstm_config(self, horizon: int) -> LstmConfig:
        return LstmConfig(
            input_dim=self.input_dim,
            target_dim=self.target_dim,
            lstm_layers=self.lstm_layers,
            hidden_width=self.hidden_width,
            ffn_layers=self.ffn_layers,
            ffn_width=self.ffn_width,
            lookback=self.lookback,
            horizon=horizon,
        )

    def synthetic_spec(self, seed: int) -> SyntheticSpec:
        rates = self.base_rates[0] if len(self.base_rates) == 1 else self.base_rates
        return SyntheticSpec(
            n_clients=self.n_clients,
            days=self.days,
            sample_period_s=self.sample_period_s,
            base_rates=rates,
            daily_amplitude=self.daily_amplitude,
            weekly_amplitude=self.weekly_amplitude,
            phase_offsets=self.phase_offsets or None,
            events_per_day=self.events_per_day,
            event_magnitude=self.event_magnitude,
            noise_std=self.noise_std,
            seed=seed,
        )

    def outlier_method_for(self, seed: int):
        """The configured detector; the forest derives its trees from `seed`."""
        if self.outlier_method == "none":
            return None
        if self.outlier_method == "zscore":
            return ZScore(threshold=self.zscore_threshold)
        if self.outlier_method == "iqr":
            return Iqr(k=self.iqr_k)
        if self.outlier_method == "isolation_forest":
            return IsolationForest(n_trees=self.forest_trees,
                                   subsample=self.forest_subsample,
                                   contamination=self.forest_contamination,
                                   seed=seed)
        return FloorCap(lower_q=self.quantile_low, upper_q=self.quantile_high)

    def aggregation_strategy(self):
        if self.strategy == "fedavg":
            return FedAvg()
        if self.strategy == "fedavgm":
            return FedAvgM(beta=self.avgm_beta)
        if self.strategy == "fednova":
            return FedNova()
        if self.strategy == "fedadagrad":
            return FedAdagrad(eta_s=self.server_lr, tau_a=self.server_tau)
        if self.strategy == "fedyogi":
            return FedYogi(eta_s=self.server_lr, beta1=self.server_beta1,
                           beta2=self.server_beta2, tau_a=self.server_tau)
        return FedAdam(eta_s=self.server_lr, beta1=self.server_beta1,
                       beta2=self.server_beta2, tau_a=self.server_tau)

    def selection_policy(self):
        if self.selection == "all":
            return All()
        if self.selection == "random":
            return Random(k_per_round=self.k_per_round)
        return Exclude(client_id=self.exclude_id)

    def weights(self) -> SustainabilityWeights:
        return SustainabilityWeights(
            alpha=self.alpha, beta=self.beta, gamma=self.gamma,
            alpha_inf=self.alpha_inf, beta_inf=self.beta_inf)

    def fingerprint(self) -> dict:
        """Every result-determining field, for hashing and the report echo."""
        out = {}
        for f in fields(self):
            if f.name in EXECUTION_KEYS:
                continue
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",),
        inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str  # keys are case-sensitive
    try:
        try:
            parser.read_string(text)
        except configparser.MissingSectionHeaderError:
            # a bare key/value file is fine; section headers only group keys
            parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ValueError(f"malformed config: {exc}") from exc

    values: dict[str, object] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _KEYS:
                raise ValueError(f"unknown config key {key!r} in section [{section}]")
            if key in values:
                raise ValueError(f"duplicate config key {key!r}")
            try:
                values[key] = _KEYS[key][1](raw)
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from exc
    return ExperimentConfig(**values)


def parse_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def default_config_text() -> str:
    """A commented config file holding every key at its default."""
    config = ExperimentConfig()
    lines = []
    section = None
    for key, (home, _) in _KEYS.items():
        if home != section:
            lines.append(f"\n[{home}]" if lines else f"[{home}]")
            section = home
        value = getattr(config, key)
        if isinstance(value, tuple):
            rendered = ", ".join(str(v) for v in value) if value else ""
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        else:
            rendered = str(value)
        prefix = "# " if rendered == "" else ""
        lines.append(f"{prefix}{key} = {rendered}")
    return "\n".join(lines) + "\n"
