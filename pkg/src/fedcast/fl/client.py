"""Client-side state and local training.

A client owns its three window sets, its optimizer state (persistent
across rounds, so momentum survives between participations), and the
scaler that maps predictions back to the original measurement scale.
Local training always starts from a copy of the broadcast weights; the
global model is never mutated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data.scaling import Scaler
from ..data.windows import WindowedDataset
from ..nn import ModelParams, OptimizerState, train_epochs


@dataclass
class ClientState:
    client_id: str
    train: WindowedDataset
    val: WindowedDataset
    test: WindowedDataset
    opt_state: OptimizerState
    scaler: Scaler | None = None  # None evaluates in the stored scale
    batch_size: int = 128

    def __post_init__(self) -> None:
        if self.train.n_windows < 1:
            raise ValueError(f"{self.client_id}: training split holds no windows")
        for name, part in (("train", self.train), ("val", self.val),
                           ("test", self.test)):
            if part.split != name:
                raise ValueError(
                    f"{self.client_id}: {name} dataset carries split tag "
                    f"{part.split!r}")

    @property
    def contribution(self) -> int:
        """Aggregation weight: the local training-window count."""
        return self.train.n_windows


@dataclass(frozen=True)
class ClientUpdate:
    client_id: str
    delta: np.ndarray  # float64 flat state, local minus global
    contribution: float
    tau: int           # local optimizer steps taken
    train_loss: float
    flops: float
    window_passes: int

    def __post_init__(self) -> None:
        if self.contribution <= 0:
            raise ValueError(f"{self.client_id}: contribution must be positive")
        if self.tau < 1:
            raise ValueError(f"{self.client_id}: tau must be >= 1")


def client_update(global_params: ModelParams, client: ClientState,
                  epochs: int) -> ClientUpdate:
    """Train a copy of the global model locally; report the delta.

    The client's optimizer state advances in place, so the next round
    resumes its momentum; everything else is functional.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    local = global_params.copy()
    local, client.opt_state, stats = train_epochs(
        local, client.train.inputs, client.train.targets, epochs,
        client.opt_state, batch_size=client.batch_size)
    delta = local.flatten().astype(np.float64) \
        - global_params.flatten().astype(np.float64)
    return ClientUpdate(
        client_id=client.client_id,
        delta=delta,
        contribution=float(client.contribution),
        tau=stats.steps,
        train_loss=stats.final_epoch_loss,
        flops=stats.flops,
        window_passes=stats.window_passes,
    )


def local_finetune(global_params: ModelParams, client: ClientState, epochs: int,
                   opt_state: OptimizerState) -> ModelParams:
    """Personalize a converged global model on one client's training data.

    Fine-tuning gets its own optimizer state: the federated momentum
    belongs to the shared objective, not to this local one. The global
    model and the client's round state are left untouched.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    personal = global_params.copy()
    if epochs == 0:
        return personal
    personal, _, _ = train_epochs(
        personal, client.train.inputs, client.train.targets, epochs,
        opt_state, batch_size=client.batch_size)
    return personal
