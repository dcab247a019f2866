"""Deterministic FLOP model used for the energy accounting.

Counts 2 FLOPs per multiply-accumulate of the matrix products only (gate
projections, recurrent products, FFN, output head); bias additions and
elementwise nonlinearities are omitted. A backward pass is priced at
twice the forward pass, so one training pass over a window costs
3 * flops_per_window(config).
"""

from __future__ import annotations

from .config import LstmConfig

BACKWARD_FORWARD_RATIO = 2


def flops_per_window(config: LstmConfig) -> int:
    """FLOPs of one forward pass over a single window."""
    w = config.hidden_width
    macs = 0
    for m in range(config.lstm_layers):
        d_in = config.lstm_input_dim(m)
        macs += config.lookback * 4 * (w * d_in + w * w)
    for l in range(config.ffn_layers):
        macs += config.ffn_width * config.ffn_input_dim(l)
    macs += config.output_dim * config.head_input_dim
    return 2 * macs


def training_flops_per_window(config: LstmConfig) -> int:
    """Forward plus backward cost of one training pass over one window."""
    return (1 + BACKWARD_FORWARD_RATIO) * flops_per_window(config)
