import numpy as np
import pytest

from fedcast.nn import (
    LstmConfig,
    deserialize_params,
    init_params,
    param_size_kb,
    serialize_params,
    serialized_size_bytes,
    state_count,
)

CFG = LstmConfig(input_dim=3, target_dim=2, hidden_width=5, lstm_layers=2,
                 ffn_layers=1, ffn_width=4, lookback=3, horizon=2)


def test_round_trip_is_exact():
    params = init_params(CFG, seed=0)
    blob = serialize_params(params)
    rebuilt = deserialize_params(blob, CFG)
    assert np.array_equal(rebuilt.data, params.data)
    assert rebuilt.dtype == np.float32


def test_wire_size_formula():
    params = init_params(CFG, seed=1)
    blob = serialize_params(params)
    # 4-byte magic + u16 version + u64 architecture hash, then f32 payload
    assert len(blob) == 14 + 4 * state_count(CFG)
    assert serialized_size_bytes(CFG) == len(blob)
    assert param_size_kb(CFG) == len(blob) / 1000.0


def test_bad_magic_rejected():
    blob = serialize_params(init_params(CFG, seed=2))
    corrupted = b"XXNN" + blob[4:]
    with pytest.raises(ValueError, match="magic"):
        deserialize_params(corrupted, CFG)


def test_version_mismatch_rejected():
    blob = bytearray(serialize_params(init_params(CFG, seed=3)))
    blob[4] = 99
    with pytest.raises(ValueError, match="version"):
        deserialize_params(bytes(blob), CFG)


def test_wrong_architecture_rejected():
    blob = serialize_params(init_params(CFG, seed=4))
    other = LstmConfig(input_dim=3, target_dim=2, hidden_width=6, lstm_layers=2,
                       ffn_layers=1, ffn_width=4, lookback=3, horizon=2)
    with pytest.raises(ValueError, match="hash mismatch"):
        deserialize_params(blob, other)


def test_truncated_payload_rejected():
    blob = serialize_params(init_params(CFG, seed=5))
    with pytest.raises(ValueError, match="bytes"):
        deserialize_params(blob[:-4], CFG)
    with pytest.raises(ValueError, match="header"):
        deserialize_params(blob[:6], CFG)


def test_float64_params_serialize_as_f32():
    params = init_params(CFG, seed=6).astype(np.float64)
    rebuilt = deserialize_params(serialize_params(params), CFG)
    np.testing.assert_array_equal(rebuilt.data, params.data.astype(np.float32))
