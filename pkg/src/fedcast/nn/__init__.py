"""From-scratch LSTM forecaster: parameters, forward/BPTT, optimizers,
FLOP model and the wire format."""

from .config import (
    GATES,
    LstmConfig,
    config_hash,
    param_count,
    state_count,
)
from .flops import flops_per_window, training_flops_per_window
from .model import backward, backward_batch, forward, forward_batch, mse_loss, predict
from .optim import AdamState, OptimizerState, SgdState, make_optimizer, optimizer_step
from .params import (
    Gradients,
    ModelParams,
    deserialize_params,
    init_params,
    param_size_kb,
    serialize_params,
    serialized_size_bytes,
    unflatten,
    zero_gradients,
)
from .train import TrainStats, train_epochs

__all__ = [
    "GATES",
    "LstmConfig",
    "config_hash",
    "param_count",
    "state_count",
    "flops_per_window",
    "training_flops_per_window",
    "forward",
    "forward_batch",
    "backward",
    "backward_batch",
    "mse_loss",
    "predict",
    "AdamState",
    "SgdState",
    "OptimizerState",
    "make_optimizer",
    "optimizer_step",
    "ModelParams",
    "Gradients",
    "init_params",
    "unflatten",
    "zero_gradients",
    "serialize_params",
    "deserialize_params",
    "serialized_size_bytes",
    "param_size_kb",
    "TrainStats",
    "train_epochs",
]
