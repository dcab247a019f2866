"""Mini-batch training loop.

Batches are taken in chronological order and the partition is identical
every epoch unless a shuffle generator is supplied; with one, the order
is reshuffled per epoch from that generator alone, so runs are
reproducible from (params, data, optimizer state, generator seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flops import training_flops_per_window
from .model import backward_batch, forward_batch
from .optim import OptimizerState, optimizer_step
from .params import ModelParams


@dataclass
class TrainStats:
    final_epoch_loss: float
    steps: int
    flops: int
    window_passes: int


def train_epochs(
    params: ModelParams,
    inputs: np.ndarray,
    targets: np.ndarray,
    epochs: int,
    opt_state: OptimizerState,
    batch_size: int = 128,
    shuffle_rng: np.random.Generator | None = None,
) -> tuple[ModelParams, OptimizerState, TrainStats]:
    """Run `epochs` full passes of MSE training over (inputs, targets).

    inputs: (n, lookback, input_dim); targets: (n, horizon, target_dim).
    Returns the trained copy, the advanced optimizer state and statistics;
    the reported loss is the mean per-window loss of the final epoch.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = inputs.shape[0]
    if targets.shape[0] != n:
        raise ValueError(f"{n} input windows but {targets.shape[0]} target windows")
    if n == 0:
        raise ValueError("cannot train on an empty window set")

    cfg = params.config
    out_size = cfg.output_dim
    per_window_flops = training_flops_per_window(cfg)
    steps = 0
    final_epoch_loss = 0.0

    for _ in range(epochs):
        order = np.arange(n) if shuffle_rng is None else shuffle_rng.permutation(n)
        sq_sum = 0.0  # float64 accumulator over the epoch
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            x = inputs[idx]
            y = targets[idx].astype(params.dtype)
            pred, cache = forward_batch(params, x, need_cache=True)
            resid = pred - y
            sq_sum += float(np.sum(resid.astype(np.float64) ** 2))
            dy = (2.0 / (idx.size * out_size)) * resid
            grads = backward_batch(params, cache, dy)
            params, opt_state = optimizer_step(params, grads, opt_state)
            steps += 1
        final_epoch_loss = sq_sum / (n * out_size)

    stats = TrainStats(
        final_epoch_loss=final_epoch_loss,
        steps=steps,
        flops=per_window_flops * n * epochs,
        window_passes=n * epochs,
    )
    return params, opt_state, stats
