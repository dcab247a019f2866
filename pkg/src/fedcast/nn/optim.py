"""Local optimizers operating on the flat learnable vector.

Both variants are functional: `optimizer_step` returns a fresh
ModelParams and the advanced state, leaving its inputs untouched. The h0
buffers sit past the learnable prefix of the flat layout and are never
updated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .params import Gradients, ModelParams


@dataclass
class SgdState:
    lr: float = 1e-3


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None


OptimizerState = SgdState | AdamState


def make_optimizer(name: str, lr: float) -> OptimizerState:
    if name == "sgd":
        return SgdState(lr=lr)
    if name == "adam":
        return AdamState(lr=lr)
    raise ValueError(f"unknown optimizer {name!r}, expected 'sgd' or 'adam'")


def optimizer_step(params: ModelParams, grads: Gradients, state: OptimizerState):
    """One update; raises on non-finite gradients so a bad step never lands."""
    g = grads.data
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite gradient component, aborting the step")
    flat = params.data.copy()
    n = g.size

    if isinstance(state, SgdState):
        flat[:n] -= np.asarray(state.lr, dtype=flat.dtype) * g
        return ModelParams(params.config, flat), state

    if isinstance(state, AdamState):
        m = np.zeros(n, dtype=flat.dtype) if state.m is None else state.m
        v = np.zeros(n, dtype=flat.dtype) if state.v is None else state.v
        t = state.step + 1
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        flat[:n] -= update.astype(flat.dtype)
        new_state = replace(state, step=t, m=m, v=v)
        return ModelParams(params.config, flat), new_state

    raise TypeError(f"unknown optimizer state {type(state).__name__}")
