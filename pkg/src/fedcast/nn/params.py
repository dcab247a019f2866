"""Parameter storage, initialization and the transport format.

All tensors of one model live in a single contiguous 1-D buffer; the
structured views (per-gate matrices, FFN weights, projection, initial
hidden states) are numpy slices of that buffer. Aggregation, optimizers
and serialization therefore operate on the flat vector directly and
flatten/unflatten is exact by construction.

Flat layout, in order:
  per LSTM layer m: W (4w x in_m, gate-major rows z,s,f,o), V (4w x w), b (4w)
  per FFN layer l:  W_l (ffn_width x in_l)
  projection:       W_p (horizon*target_dim x head_in)
  per LSTM layer m: h0 (w)            <- non-learned buffers, kept last so the
                                         learnable prefix aligns with Gradients
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .config import (
    GATES,
    SERIAL_MAGIC,
    SERIAL_VERSION,
    LstmConfig,
    config_hash,
    param_count,
    state_count,
)

_HEADER = struct.Struct(f"<{len(SERIAL_MAGIC)}sHQ")


@dataclass
class LstmLayerParams:
    """Views into one recurrent layer; W/V rows are gate-major (z, s, f, o)."""

    W: np.ndarray
    V: np.ndarray
    b: np.ndarray

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(W_g, V_g, b_g) views for gate `name` in GATES."""
        i = GATES.index(name)
        w = self.V.shape[1]
        return self.W[i * w:(i + 1) * w], self.V[i * w:(i + 1) * w], self.b[i * w:(i + 1) * w]


def _carve(config: LstmConfig, buf: np.ndarray, with_buffers: bool):
    """Slice `buf` into structured views following the flat layout."""
    w = config.hidden_width
    pos = 0

    def take(shape) -> np.ndarray:
        nonlocal pos
        n = int(np.prod(shape))
        view = buf[pos:pos + n].reshape(shape)
        pos += n
        return view

    layers = []
    for m in range(config.lstm_layers):
        d_in = config.lstm_input_dim(m)
        layers.append(LstmLayerParams(W=take((4 * w, d_in)), V=take((4 * w, w)), b=take((4 * w,))))
    ffn = [take((config.ffn_width, config.ffn_input_dim(l))) for l in range(config.ffn_layers)]
    W_p = take((config.output_dim, config.head_input_dim))
    h0 = [take((w,)) for m in range(config.lstm_layers)] if with_buffers else []
    if pos != buf.size:
        raise ValueError(f"flat vector has {buf.size} elements, layout needs {pos}")
    return layers, ffn, W_p, h0


@dataclass
class ModelParams:
    """One model's full state; `data` owns the storage, views alias it."""

    config: LstmConfig
    data: np.ndarray
    layers: list[LstmLayerParams] = field(init=False)
    ffn: list[np.ndarray] = field(init=False)
    W_p: np.ndarray = field(init=False)
    h0: list[np.ndarray] = field(init=False)

    def __post_init__(self) -> None:
        if self.data.ndim != 1:
            raise ValueError("params buffer must be 1-D")
        if self.data.size != state_count(self.config):
            raise ValueError(
                f"params buffer has {self.data.size} elements, "
                f"config needs {state_count(self.config)}")
        self.layers, self.ffn, self.W_p, self.h0 = _carve(self.config, self.data, True)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def n_learnable(self) -> int:
        return param_count(self.config)

    def flatten(self) -> np.ndarray:
        """Copy of the full flat state vector (learnables then h0 buffers)."""
        return self.data.copy()

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, self.data.copy())

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(self.config, self.data.astype(dtype))


@dataclass
class Gradients:
    """Same structure as the learnable part of ModelParams; no h0 entries."""

    config: LstmConfig
    data: np.ndarray
    layers: list[LstmLayerParams] = field(init=False)
    ffn: list[np.ndarray] = field(init=False)
    W_p: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.data.ndim != 1 or self.data.size != param_count(self.config):
            raise ValueError(
                f"gradient buffer has {self.data.size} elements, "
                f"config needs {param_count(self.config)}")
        self.layers, self.ffn, self.W_p, _ = _carve(self.config, self.data, False)

    def flatten(self) -> np.ndarray:
        return self.data.copy()


def unflatten(config: LstmConfig, vec: np.ndarray) -> ModelParams:
    """Rebuild a ModelParams from a flat state vector (copies the input)."""
    return ModelParams(config, np.asarray(vec).copy())


def zero_gradients(config: LstmConfig, dtype=np.float32) -> Gradients:
    return Gradients(config, np.zeros(param_count(config), dtype=dtype))


def init_params(config: LstmConfig, seed: int, dtype=np.float32) -> ModelParams:
    """Fresh model: weights uniform in +-1/sqrt(fan_in), zero biases,
    h0 drawn from N(0, 0.01) and never trained afterwards."""
    rng = np.random.default_rng(seed)
    params = ModelParams(config, np.zeros(state_count(config), dtype=dtype))
    for layer in params.layers:
        fan_w = layer.W.shape[1]
        fan_v = layer.V.shape[1]
        layer.W[...] = rng.uniform(-1.0, 1.0, layer.W.shape) / np.sqrt(fan_w)
        layer.V[...] = rng.uniform(-1.0, 1.0, layer.V.shape) / np.sqrt(fan_v)
        # biases stay zero
    for W in params.ffn:
        W[...] = rng.uniform(-1.0, 1.0, W.shape) / np.sqrt(W.shape[1])
    params.W_p[...] = rng.uniform(-1.0, 1.0, params.W_p.shape) / np.sqrt(params.W_p.shape[1])
    for h0 in params.h0:
        h0[...] = rng.normal(0.0, 0.1, h0.shape)  # variance 0.01
    return params


def serialize_params(params: ModelParams) -> bytes:
    """Wire format: magic, format version, architecture hash, then the flat
    state as little-endian float32."""
    header = _HEADER.pack(SERIAL_MAGIC, SERIAL_VERSION, config_hash(params.config))
    return header + params.data.astype("<f4").tobytes()


def deserialize_params(blob: bytes, config: LstmConfig) -> ModelParams:
    if len(blob) < _HEADER.size:
        raise ValueError("serialized model is shorter than its header")
    magic, version, chash = _HEADER.unpack_from(blob)
    if magic != SERIAL_MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {SERIAL_MAGIC!r}")
    if version != SERIAL_VERSION:
        raise ValueError(f"unsupported format version {version}")
    if chash != config_hash(config):
        raise ValueError("architecture hash mismatch: wrong config for this blob")
    payload = blob[_HEADER.size:]
    expected = state_count(config) * 4
    if len(payload) != expected:
        raise ValueError(f"payload holds {len(payload)} bytes, config needs {expected}")
    vec = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    return ModelParams(config, vec)


def serialized_size_bytes(config: LstmConfig) -> int:
    return _HEADER.size + 4 * state_count(config)


def param_size_kb(config: LstmConfig) -> float:
    """Size of one serialized model in kB (1 kB = 1000 bytes)."""
    return serialized_size_bytes(config) / 1000.0
