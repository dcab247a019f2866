import numpy as np
import pytest

from fedcast.nn import (
    AdamState,
    Gradients,
    LstmConfig,
    SgdState,
    init_params,
    make_optimizer,
    optimizer_step,
    param_count,
)

CFG = LstmConfig(input_dim=1, target_dim=1, hidden_width=1, ffn_layers=0,
                 lookback=1, horizon=1)


def constant_grads(cfg, value):
    return Gradients(cfg, np.full(param_count(cfg), value, dtype=np.float32))


def test_sgd_update_rule():
    params = init_params(CFG, seed=0)
    params.data[...] = 1.0
    new, state = optimizer_step(params, constant_grads(CFG, 0.5), SgdState(lr=0.1))
    # theta <- theta - lr * g = 1 - 0.1 * 0.5
    np.testing.assert_allclose(new.data[:new.n_learnable], 0.95, rtol=1e-7)
    assert isinstance(state, SgdState)


def test_h0_buffer_never_updated():
    params = init_params(CFG, seed=0)
    h0_before = [h.copy() for h in params.h0]
    new, _ = optimizer_step(params, constant_grads(CFG, 0.5), SgdState(lr=0.1))
    for h_old, h_new in zip(h0_before, new.h0):
        assert np.array_equal(h_old, h_new)
    new2, _ = optimizer_step(params, constant_grads(CFG, 0.5), AdamState(lr=0.1))
    for h_old, h_new in zip(h0_before, new2.h0):
        assert np.array_equal(h_old, h_new)


def test_zero_gradient_is_identity_for_sgd():
    params = init_params(CFG, seed=1)
    new, _ = optimizer_step(params, constant_grads(CFG, 0.0), SgdState(lr=0.7))
    assert np.array_equal(new.data, params.data)


def test_step_is_functional():
    params = init_params(CFG, seed=2)
    before = params.data.copy()
    optimizer_step(params, constant_grads(CFG, 1.0), SgdState(lr=0.5))
    assert np.array_equal(params.data, before)


def test_adam_first_step_magnitude_is_learning_rate():
    # with constant gradient g: m_hat = g, v_hat = g^2, so the first update
    # is lr * g / (|g| + eps), magnitude almost exactly lr; float64 params
    # keep the measurement free of storage quantization
    params = init_params(CFG, seed=3).astype(np.float64)
    before = params.data.copy()
    lr = 1e-3
    grads = Gradients(CFG, np.full(param_count(CFG), 0.3, dtype=np.float64))
    new, state = optimizer_step(params, grads, AdamState(lr=lr))
    delta = before[:new.n_learnable] - new.data[:new.n_learnable]
    np.testing.assert_allclose(delta, lr, rtol=1e-6)
    assert state.step == 1
    assert state.m is not None and state.v is not None


def test_adam_direction_follows_gradient_sign():
    params = init_params(CFG, seed=4)
    n = param_count(CFG)
    g = np.linspace(-1.0, 1.0, n).astype(np.float32)
    g[g == 0.0] = 0.5
    before = params.data.copy()
    new, _ = optimizer_step(params, Gradients(CFG, g), AdamState(lr=1e-2))
    moved = before[:n] - new.data[:n]
    assert np.all(np.sign(moved) == np.sign(g))


def test_adam_state_advances_across_steps():
    params = init_params(CFG, seed=5)
    state = AdamState(lr=1e-3)
    for expected_step in (1, 2, 3):
        params, state = optimizer_step(params, constant_grads(CFG, 0.1), state)
        assert state.step == expected_step


def test_non_finite_gradients_abort_the_step():
    params = init_params(CFG, seed=6)
    bad = np.full(param_count(CFG), 0.1, dtype=np.float32)
    bad[0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        optimizer_step(params, Gradients(CFG, bad), SgdState(lr=0.1))
    bad[0] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        optimizer_step(params, Gradients(CFG, bad), AdamState(lr=0.1))


def test_make_optimizer():
    assert isinstance(make_optimizer("sgd", 0.01), SgdState)
    adam = make_optimizer("adam", 0.02)
    assert isinstance(adam, AdamState) and adam.lr == 0.02
    with pytest.raises(ValueError, match="unknown optimizer"):
        make_optimizer("rmsprop", 0.01)
