"""Server-side aggregation of client deltas.

All strategies consume the contribution-weighted pseudo-gradient
g = sum_k p_k * delta_k with p_k = c_k / sum(c), accumulated in float64
in ascending client-id order, then write the combined step back in the
parameter dtype. FedAvg applies g directly (the weighted model mean in
delta form); FedAvgM smooths it with server momentum; FedNova rescales
by local step counts so clients that took more optimizer steps do not
dominate; the adaptive family (Adagrad/Yogi/Adam) treats g as a
gradient for a server-side optimizer with persistent moments.

Identical client models give delta = 0 and reproduce the global model
bit-exactly, and scaling every contribution by a common factor leaves
all strategies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import ModelParams
from .client import ClientUpdate


@dataclass(frozen=True)
class FedAvg:
    pass


@dataclass(frozen=True)
class FedAvgM:
    beta: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")


@dataclass(frozen=True)
class FedNova:
    pass


def _check_adaptive(eta_s: float, beta1: float, beta2: float, tau_a: float) -> None:
    if eta_s <= 0 or tau_a <= 0:
        raise ValueError(f"eta_s and tau_a must be positive, got {eta_s}, {tau_a}")
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ValueError(f"betas must lie in [0, 1), got {beta1}, {beta2}")


@dataclass(frozen=True)
class FedAdagrad:
    eta_s: float = 0.01
    tau_a: float = 1e-3

    def __post_init__(self) -> None:
        _check_adaptive(self.eta_s, 0.0, 0.0, self.tau_a)


@dataclass(frozen=True)
class FedYogi:
    eta_s: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.99
    tau_a: float = 1e-3

    def __post_init__(self) -> None:
        _check_adaptive(self.eta_s, self.beta1, self.beta2, self.tau_a)


@dataclass(frozen=True)
class FedAdam:
    eta_s: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.99
    tau_a: float = 1e-3

    def __post_init__(self) -> None:
        _check_adaptive(self.eta_s, self.beta1, self.beta2, self.tau_a)


AggregationStrategy = FedAvg | FedAvgM | FedNova | FedAdagrad | FedYogi | FedAdam

STRATEGY_NAMES = {
    "fedavg": FedAvg,
    "fedavgm": FedAvgM,
    "fednova": FedNova,
    "fedadagrad": FedAdagrad,
    "fedyogi": FedYogi,
    "fedadam": FedAdam,
}


def make_strategy(name: str) -> AggregationStrategy:
    try:
        return STRATEGY_NAMES[name.lower()]()
    except KeyError:
        raise ValueError(
            f"unknown aggregation strategy {name!r}, expected one of "
            f"{sorted(STRATEGY_NAMES)}")


def strategy_name(strategy: AggregationStrategy) -> str:
    for name, cls in STRATEGY_NAMES.items():
        if isinstance(strategy, cls):
            return name
    raise ValueError(f"unknown aggregation strategy {strategy!r}")


@dataclass
class ServerState:
    """Global weights plus whatever memory the strategy keeps."""

    params: ModelParams
    round_index: int = 0
    momentum: np.ndarray | None = None  # FedAvgM velocity
    m: np.ndarray | None = None         # adaptive first moment
    v: np.ndarray | None = None         # adaptive second moment

    def __post_init__(self) -> None:
        n = self.params.data.size
        for name, buf in (("momentum", self.momentum), ("m", self.m), ("v", self.v)):
            if buf is not None and buf.shape != (n,):
                raise ValueError(
                    f"{name} buffer shape {buf.shape} does not match {n} parameters")


def _ordered_updates(updates: list[ClientUpdate], n: int) -> list[ClientUpdate]:
    ordered = sorted(updates, key=lambda u: u.client_id)
    if len({u.client_id for u in ordered}) != len(ordered):
        raise ValueError("duplicate client ids in one aggregation round")
    for u in ordered:
        if u.delta.shape != (n,):
            raise ValueError(
                f"{u.client_id}: delta has shape {u.delta.shape}, expected ({n},)")
    return ordered


def _fold(ordered: list[ClientUpdate], coeffs: list[float], n: int) -> np.ndarray:
    g = np.zeros(n, dtype=np.float64)
    for u, coeff in zip(ordered, coeffs):
        g += coeff * u.delta
    return g


def _pseudo_gradient(ordered: list[ClientUpdate], n: int) -> np.ndarray:
    """g = sum_k p_k delta_k with p_k = c_k / sum(c)."""
    total = sum(u.contribution for u in ordered)
    return _fold(ordered, [u.contribution / total for u in ordered], n)


def _nova_step(ordered: list[ClientUpdate], n: int) -> np.ndarray:
    """tau_eff * sum_k (p_k / tau_k) delta_k without intermediate rounding.

    Contributions and step counts are integers, so each client's
    combined coefficient A*c_k / (S^2 * tau_k), with S = sum(c) and
    A = sum(c_j * tau_j), is a single correctly rounded division of
    exact products. When every tau_k is equal the true ratio collapses
    to c_k / S, so the result matches plain averaging bit for bit.
    """
    S = sum(u.contribution for u in ordered)
    A = sum(u.contribution * u.tau for u in ordered)
    return _fold(ordered, [(A * u.contribution) / (S * S * u.tau) for u in ordered], n)


def aggregate(server: ServerState, updates: list[ClientUpdate],
              strategy: AggregationStrategy) -> ServerState:
    """Fold one round of client updates into a new server state."""
    if not updates:
        raise ValueError("cannot aggregate an empty update list")
    params = server.params
    n = params.data.size
    w = params.flatten().astype(np.float64)
    ordered = _ordered_updates(updates, n)

    momentum, m, v = server.momentum, server.m, server.v
    if isinstance(strategy, FedAvg):
        step = _pseudo_gradient(ordered, n)
    elif isinstance(strategy, FedNova):
        step = _nova_step(ordered, n)
    elif isinstance(strategy, FedAvgM):
        g = _pseudo_gradient(ordered, n)
        momentum = np.zeros(n) if momentum is None else momentum
        momentum = strategy.beta * momentum + g
        step = momentum
    elif isinstance(strategy, (FedAdagrad, FedYogi, FedAdam)):
        g = _pseudo_gradient(ordered, n)
        beta1 = 0.0 if isinstance(strategy, FedAdagrad) else strategy.beta1
        m = np.zeros(n) if m is None else m
        v = np.zeros(n) if v is None else v
        m = beta1 * m + (1.0 - beta1) * g
        g2 = g * g
        if isinstance(strategy, FedAdagrad):
            v = v + g2
        elif isinstance(strategy, FedYogi):
            v = v - (1.0 - strategy.beta2) * g2 * np.sign(v - g2)
        else:
            v = strategy.beta2 * v + (1.0 - strategy.beta2) * g2
        step = strategy.eta_s * m / (np.sqrt(v) + strategy.tau_a)
    else:
        raise ValueError(f"unknown aggregation strategy {strategy!r}")

    new_params = ModelParams(
        config=params.config,
        data=(w + step).astype(params.dtype),
    )
    return ServerState(
        params=new_params,
        round_index=server.round_index + 1,
        momentum=momentum,
        m=m,
        v=v,
    )
