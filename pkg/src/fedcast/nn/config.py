"""Architecture description for the stacked-LSTM forecaster.

The network maps a lookback window of feature vectors to a multi-step
forecast emitted in one shot: M recurrent layers, an optional ReLU
feed-forward stack, then a linear projection reshaped to
(horizon, target_dim). All shape and parameter-count questions are
answered here so the rest of the package can treat the model as a flat
vector when it needs to.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

# Gate order used everywhere a fused gate dimension appears: candidate,
# input gate, forget gate, output gate.
GATES = ("z", "s", "f", "o")

SERIAL_MAGIC = b"FCNN"
SERIAL_VERSION = 1


@dataclass(frozen=True)
class LstmConfig:
    """Shape of one forecaster; equal configs mean interchangeable weights."""

    input_dim: int = 11
    target_dim: int = 5
    lstm_layers: int = 1
    hidden_width: int = 128
    ffn_layers: int = 1
    ffn_width: int = 64
    lookback: int = 10
    horizon: int = 1

    def __post_init__(self) -> None:
        for name in ("input_dim", "target_dim", "lstm_layers", "hidden_width",
                     "ffn_width", "lookback"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.ffn_layers < 0:
            raise ValueError(f"ffn_layers must be >= 0, got {self.ffn_layers}")
        if not 1 <= self.horizon <= 10:
            raise ValueError(f"horizon must be in [1, 10], got {self.horizon}")

    def lstm_input_dim(self, layer: int) -> int:
        """Input width of LSTM layer `layer` (0-based); layer 0 reads the window."""
        return self.input_dim if layer == 0 else self.hidden_width

    def ffn_input_dim(self, layer: int) -> int:
        return self.hidden_width if layer == 0 else self.ffn_width

    @property
    def head_input_dim(self) -> int:
        """Width of the vector the projection reads."""
        return self.ffn_width if self.ffn_layers > 0 else self.hidden_width

    @property
    def output_dim(self) -> int:
        return self.horizon * self.target_dim


def lstm_layer_counts(config: LstmConfig, layer: int) -> tuple[int, int, int]:
    """(input-weight, recurrent-weight, bias) element counts of one layer."""
    w = config.hidden_width
    d_in = config.lstm_input_dim(layer)
    return 4 * w * d_in, 4 * w * w, 4 * w


def param_count(config: LstmConfig) -> int:
    """Number of learnable parameters (initial-state buffers excluded)."""
    total = 0
    for m in range(config.lstm_layers):
        total += sum(lstm_layer_counts(config, m))
    for l in range(config.ffn_layers):
        total += config.ffn_width * config.ffn_input_dim(l)
    total += config.output_dim * config.head_input_dim
    return total


def state_count(config: LstmConfig) -> int:
    """Length of the full flat state vector: learnables plus h0 buffers."""
    return param_count(config) + config.lstm_layers * config.hidden_width


def config_hash(config: LstmConfig) -> int:
    """Stable 64-bit fingerprint of the architecture, used in the wire header."""
    text = ",".join(f"{f.name}={getattr(config, f.name)}" for f in fields(config))
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")
