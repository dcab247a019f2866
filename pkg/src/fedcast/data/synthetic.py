"""Synthetic multi-client traffic with controllable heterogeneity.

Each client's load curve is a base rate modulated by daily and weekly
sinusoids (phase-shifted per client), multiplied up during randomly
placed surge events, and roughened by per-feature multiplicative noise.
Feature columns are derived from that one load curve: volume-like
columns scale with it, modulation-and-coding means fall as utilisation
rises. Clients differ through their base rates, phases, and event
draws, which is what makes the cohort non-iid.

Periodic terms are computed from (t mod period) / period rather than
from raw t, so with noise and events disabled a column is bit-exactly
periodic, which the statistical sanity checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import FEATURES, RawSeries

DAY_S = 86_400.0
WEEK_S = 604_800.0

# Events last between one and three hours.
EVENT_MIN_S = 3_600.0
EVENT_MAX_S = 10_800.0


@dataclass(frozen=True)
class SyntheticSpec:
    n_clients: int = 7
    days: float = 3.0
    sample_period_s: float = 60.0
    base_rates: tuple[float, ...] | float = 100.0
    daily_amplitude: float = 0.8
    weekly_amplitude: float = 0.1
    phase_offsets: tuple[float, ...] | None = None  # None: spread over one cycle
    events_per_day: float = 0.5
    event_magnitude: float = 3.0
    noise_std: float = 0.05
    seed: int = 0
    start_epoch_ms: int = 1_600_000_000_000

    def __post_init__(self) -> None:
        if self.n_clients < 1:
            raise ValueError(f"n_clients must be >= 1, got {self.n_clients}")
        if self.days <= 0 or self.sample_period_s <= 0:
            raise ValueError("days and sample_period_s must be positive")
        if self.daily_amplitude < 0 or self.weekly_amplitude < 0:
            raise ValueError("amplitudes must be nonnegative")
        if self.daily_amplitude + self.weekly_amplitude >= 1.0:
            raise ValueError(
                "daily_amplitude + weekly_amplitude must stay below 1 "
                "so the load never crosses zero")
        if self.events_per_day < 0:
            raise ValueError("events_per_day must be nonnegative")
        if self.event_magnitude <= 0:
            raise ValueError("event_magnitude must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        for rate in self.client_base_rates():
            if rate <= 0:
                raise ValueError(f"base rates must be positive, got {rate}")
        if self.phase_offsets is not None and len(self.phase_offsets) != self.n_clients:
            raise ValueError(
                f"{len(self.phase_offsets)} phase offsets for {self.n_clients} clients")

    def client_base_rates(self) -> tuple[float, ...]:
        if isinstance(self.base_rates, (int, float)):
            return (float(self.base_rates),) * self.n_clients
        if len(self.base_rates) != self.n_clients:
            raise ValueError(
                f"{len(self.base_rates)} base rates for {self.n_clients} clients")
        return tuple(float(r) for r in self.base_rates)

    def client_phases(self) -> tuple[float, ...]:
        if self.phase_offsets is not None:
            return tuple(float(p) for p in self.phase_offsets)
        return tuple(2.0 * np.pi * k / self.n_clients for k in range(self.n_clients))

    @property
    def n_samples(self) -> int:
        return int(round(self.days * DAY_S / self.sample_period_s))


def _feature_matrix(load: np.ndarray, base: float) -> np.ndarray:
    """Map the load curve to the 11-column schema.

    Utilisation u = load/base drives the coding-rate means downward
    (heavier cells schedule more conservatively); everything else grows
    with absolute load.
    """
    u = load / base
    shrink = u / (1.0 + u)
    cols = {
        "rb_dl_mean": 0.8 * load,
        "rb_dl_var": 0.1 * load,
        "rb_ul_mean": 0.4 * load,
        "rb_ul_var": 0.05 * load,
        "rnti_count": load,
        "mcs_dl_mean": 28.0 - 12.0 * shrink,
        "mcs_dl_var": 0.04 * load,
        "mcs_ul_mean": 24.0 - 10.0 * shrink,
        "mcs_ul_var": 0.03 * load,
        "tb_dl": 5_000.0 * load,
        "tb_ul": 1_000.0 * load,
    }
    return np.stack([cols[name] for name in FEATURES], axis=1)


def generate_client(spec: SyntheticSpec, client_index: int) -> RawSeries:
    if not 0 <= client_index < spec.n_clients:
        raise ValueError(
            f"client_index {client_index} out of range for {spec.n_clients} clients")
    rng = np.random.default_rng([spec.seed, client_index])
    base = spec.client_base_rates()[client_index]
    phase = spec.client_phases()[client_index]

    n = spec.n_samples
    t_s = np.arange(n, dtype=np.float64) * spec.sample_period_s
    day_frac = np.mod(t_s, DAY_S) / DAY_S
    week_frac = np.mod(t_s, WEEK_S) / WEEK_S
    load = base * (1.0
                   + spec.daily_amplitude * np.sin(2.0 * np.pi * day_frac + phase)
                   + spec.weekly_amplitude * np.sin(2.0 * np.pi * week_frac))

    n_events = int(rng.poisson(spec.events_per_day * spec.days))
    duration_s = n * spec.sample_period_s
    for _ in range(n_events):
        start = rng.uniform(0.0, duration_s)
        length = rng.uniform(EVENT_MIN_S, EVENT_MAX_S)
        hit = (t_s >= start) & (t_s < start + length)
        load[hit] *= spec.event_magnitude

    values = _feature_matrix(load, base)
    if spec.noise_std > 0.0:
        for j in range(values.shape[1]):
            values[:, j] *= 1.0 + spec.noise_std * rng.standard_normal(n)
    np.clip(values, 0.0, None, out=values)

    step_ms = int(round(spec.sample_period_s * 1000.0))
    timestamps = spec.start_epoch_ms + np.arange(n, dtype=np.int64) * step_ms
    return RawSeries(
        client_id=f"client{client_index}",
        timestamps=timestamps,
        values=values,
    )


def generate_cohort(spec: SyntheticSpec) -> list[RawSeries]:
    """All clients for one spec; each client's draws are independent of
    the others, so regenerating a single client is stable."""
    return [generate_client(spec, k) for k in range(spec.n_clients)]
