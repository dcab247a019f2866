"""Federated orchestration: clients, aggregation, selection, runners."""

from .aggregation import (
    STRATEGY_NAMES,
    AggregationStrategy,
    FedAdagrad,
    FedAdam,
    FedAvg,
    FedAvgM,
    FedNova,
    FedYogi,
    ServerState,
    aggregate,
    make_strategy,
    strategy_name,
)
from .client import ClientState, ClientUpdate, client_update, local_finetune
from .runner import (
    RoundReport,
    deletion_study,
    evaluate_forecasts,
    run_centralized,
    run_federated,
    run_individual,
)
from .selection import All, Exclude, Random, SelectionPolicy, select_clients

__all__ = [
    "AggregationStrategy",
    "FedAvg",
    "FedAvgM",
    "FedNova",
    "FedAdagrad",
    "FedYogi",
    "FedAdam",
    "STRATEGY_NAMES",
    "make_strategy",
    "strategy_name",
    "ServerState",
    "aggregate",
    "ClientState",
    "ClientUpdate",
    "client_update",
    "local_finetune",
    "RoundReport",
    "evaluate_forecasts",
    "run_federated",
    "run_individual",
    "run_centralized",
    "deletion_study",
    "SelectionPolicy",
    "All",
    "Random",
    "Exclude",
    "select_clients",
]
