"""Forward pass and backpropagation through time for the forecaster.

Cell, per layer m and step t (x is the layer input, h/c the recurrent state):

    z = tanh(W_z x + V_z h + b_z)        candidate
    s = sigmoid(W_s x + V_s h + b_s)     input gate
    f = sigmoid(W_f x + V_f h + b_f)     forget gate
    o = sigmoid(W_o x + V_o h + b_o)     output gate
    c' = s*z + f*c
    h' = o * tanh(c')

Layer 0 reads the raw window rows; layer m reads layer m-1's hidden
sequence. h starts from the fixed h0 buffer, c starts at zero. The last
step's top hidden state feeds the ReLU stack and the linear projection,
whose output is reshaped to (horizon, target_dim): all future steps are
emitted in one shot, there is no autoregressive feedback.

The backward pass is derived by hand and kept in one place so it can be
checked against finite differences; gradients flow through both the
hidden and the cell recurrences, and nothing is propagated into the h0
buffers (they are constants, not parameters).

Everything is batched over windows; `forward`/`backward` are the
single-window wrappers. Computation follows the parameter dtype, so the
same code path runs in float32 for training and float64 for gradient
checking. Internally sequences are held time-major, (lookback, batch, .),
and the step loops write through preallocated scratch: every hot-loop
operand is then contiguous and temporary allocation stays off the path.
"""

from __future__ import annotations

import numpy as np

from .params import Gradients, ModelParams, zero_gradients


def _fingerprint(params: ModelParams) -> tuple:
    """Cheap mutation detector for cached activations."""
    data = params.data
    stride = max(1, data.size // 64)
    return (
        data.size,
        float(data[::stride].astype(np.float64).sum()),
        float(data[0]),
        float(data[-1]),
    )


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over every element, accumulated in float64."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred.astype(np.float64) - target.astype(np.float64)
    return float(np.mean(diff * diff))


def forward_batch(params: ModelParams, x: np.ndarray, need_cache: bool = False):
    """Run `x` of shape (batch, lookback, input_dim) through the model.

    Returns (predictions, cache); predictions have shape
    (batch, horizon, target_dim), cache is None unless requested.
    """
    cfg = params.config
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[1] != cfg.lookback or x.shape[2] != cfg.input_dim:
        raise ValueError(
            f"window batch shape {x.shape} does not match "
            f"(*, {cfg.lookback}, {cfg.input_dim})")
    B, L, _ = x.shape
    w = cfg.hidden_width

    # seqs[m] is layer m's input sequence, time-major
    seqs = [np.ascontiguousarray(x.transpose(1, 0, 2), dtype=params.dtype)]
    gates = []
    a = np.empty((B, 4 * w), dtype=params.dtype)
    h = np.empty((B, w), dtype=params.dtype)
    c = np.empty((B, w), dtype=params.dtype)
    scratch = np.empty((B, w), dtype=params.dtype)
    for m, layer in enumerate(params.layers):
        x_in = seqs[m]
        d_in = x_in.shape[2]
        pre = np.empty((L * B, 4 * w), dtype=params.dtype)
        np.matmul(x_in.reshape(L * B, d_in), layer.W.T, out=pre)
        pre = pre.reshape(L, B, 4 * w)
        pre += layer.b

        H = np.empty((L, B, w), dtype=params.dtype)
        Z = np.empty_like(H)
        S = np.empty_like(H)
        F = np.empty_like(H)
        O = np.empty_like(H)
        C = np.empty_like(H)
        TC = np.empty_like(H)

        h[...] = params.h0[m]
        c[...] = 0.0
        for t in range(L):
            np.matmul(h, layer.V.T, out=a)
            a += pre[t]
            z = np.tanh(a[:, :w], out=Z[t])
            gate = a[:, w:]
            gate *= 0.5
            np.tanh(gate, out=gate)
            gate += 1.0
            gate *= 0.5  # sigmoid via tanh, in place
            S[t] = gate[:, :w]
            F[t] = gate[:, w:2 * w]
            O[t] = gate[:, 2 * w:]
            np.multiply(F[t], c, out=scratch)
            np.multiply(S[t], z, out=c)
            c += scratch
            C[t] = c
            tc = np.tanh(c, out=TC[t])
            np.multiply(O[t], tc, out=h)
            H[t] = h
        seqs.append(H)
        gates.append({"Z": Z, "S": S, "F": F, "O": O, "C": C, "TC": TC})

    v = seqs[-1][-1]
    vs = [v]
    us = []
    for W in params.ffn:
        u = v @ W.T
        v = np.maximum(u, 0.0)
        us.append(u)
        vs.append(v)
    yflat = v @ params.W_p.T
    y = yflat.reshape(B, cfg.horizon, cfg.target_dim)

    cache = None
    if need_cache:
        cache = {
            "seqs": seqs,
            "gates": gates,
            "vs": vs,
            "us": us,
            "y": y,
            "fingerprint": _fingerprint(params),
        }
    return y, cache


def backward_batch(params: ModelParams, cache: dict, dy: np.ndarray) -> Gradients:
    """Backpropagate `dy` (gradient of the loss w.r.t. the predictions,
    shape (batch, horizon, target_dim)) through the cached forward pass."""
    cfg = params.config
    if cache["fingerprint"] != _fingerprint(params):
        raise ValueError("stale cache: parameters changed since the forward pass")
    seqs = cache["seqs"]
    L, B, _ = seqs[0].shape
    w = cfg.hidden_width
    grads = zero_gradients(cfg, dtype=params.dtype)

    dyflat = np.ascontiguousarray(dy, dtype=params.dtype).reshape(B, cfg.output_dim)
    np.matmul(dyflat.T, cache["vs"][-1], out=grads.W_p)
    dv = dyflat @ params.W_p
    for l in range(cfg.ffn_layers - 1, -1, -1):
        du = dv * (cache["us"][l] > 0)
        np.matmul(du.T, cache["vs"][l], out=grads.ffn[l])
        dv = du @ params.ffn[l]

    # gradient w.r.t. each layer's hidden sequence; only the final step of
    # the top layer is reached by the head
    dH_out = np.zeros((L, B, w), dtype=params.dtype)
    dH_out[-1] = dv

    # scratch reused across steps; the carries are read at the top of each
    # iteration and rewritten at the bottom
    dh = np.empty((B, w), dtype=params.dtype)
    dc = np.empty((B, w), dtype=params.dtype)
    tmp = np.empty((B, w), dtype=params.dtype)
    dh_carry = np.empty((B, w), dtype=params.dtype)
    dc_carry = np.empty((B, w), dtype=params.dtype)

    for m in range(cfg.lstm_layers - 1, -1, -1):
        layer = params.layers[m]
        g = cache["gates"][m]
        Z, S, F, O, C, TC = g["Z"], g["S"], g["F"], g["O"], g["C"], g["TC"]
        x_in = seqs[m]
        H = seqs[m + 1]
        d_in = x_in.shape[2]

        dA = np.empty((L, B, 4 * w), dtype=params.dtype)
        dh_carry[...] = 0.0
        dc_carry[...] = 0.0
        for t in range(L - 1, -1, -1):
            z, s, f, o, tc = Z[t], S[t], F[t], O[t], TC[t]
            np.add(dH_out[t], dh_carry, out=dh)
            # dc = dh * o * (1 - tc^2) + dc_carry
            np.multiply(tc, tc, out=tmp)
            np.subtract(1.0, tmp, out=tmp)
            tmp *= o
            tmp *= dh
            np.add(tmp, dc_carry, out=dc)
            # candidate pre-activation: dc * s * (1 - z^2)
            np.multiply(z, z, out=tmp)
            np.subtract(1.0, tmp, out=tmp)
            tmp *= s
            np.multiply(tmp, dc, out=dA[t, :, :w])
            # input gate: dc * z * s(1-s)
            np.subtract(1.0, s, out=tmp)
            tmp *= s
            tmp *= z
            np.multiply(tmp, dc, out=dA[t, :, w:2 * w])
            # forget gate: dc * c_prev * f(1-f); c_prev is zero at t=0
            if t > 0:
                np.subtract(1.0, f, out=tmp)
                tmp *= f
                tmp *= C[t - 1]
                np.multiply(tmp, dc, out=dA[t, :, 2 * w:3 * w])
            else:
                dA[t, :, 2 * w:3 * w] = 0.0
            # output gate: dh * tc * o(1-o)
            np.subtract(1.0, o, out=tmp)
            tmp *= o
            tmp *= tc
            np.multiply(tmp, dh, out=dA[t, :, 3 * w:])
            np.matmul(dA[t], layer.V, out=dh_carry)
            np.multiply(dc, f, out=dc_carry)

        dA2 = dA.reshape(L * B, 4 * w)
        np.matmul(dA2.T, x_in.reshape(L * B, d_in), out=grads.layers[m].W)
        H_prev = np.concatenate(
            [np.broadcast_to(params.h0[m], (1, B, w)), H[:-1]], axis=0)
        np.matmul(dA2.T, H_prev.reshape(L * B, w), out=grads.layers[m].V)
        np.sum(dA2, axis=0, out=grads.layers[m].b)
        dH_out = (dA2 @ layer.W).reshape(L, B, d_in)

    return grads


def forward(params: ModelParams, window: np.ndarray):
    """Single window (lookback, input_dim) -> ((horizon, target_dim), cache)."""
    window = np.asarray(window)
    if window.ndim != 2:
        raise ValueError(f"window must be 2-D, got shape {window.shape}")
    y, cache = forward_batch(params, window[None], need_cache=True)
    return y[0], cache


def backward(params: ModelParams, cache: dict, target: np.ndarray) -> Gradients:
    """Gradients of the single-window MSE loss stored by `forward`."""
    cfg = params.config
    target = np.asarray(target)
    if target.shape != (cfg.horizon, cfg.target_dim):
        raise ValueError(
            f"target shape {target.shape} does not match "
            f"({cfg.horizon}, {cfg.target_dim})")
    pred = cache["y"]
    dy = 2.0 * (pred - target[None].astype(params.dtype)) / cfg.output_dim
    return backward_batch(params, cache, dy)


def predict(params: ModelParams, windows: np.ndarray, batch_size: int = 1024) -> np.ndarray:
    """Forward passes without cache retention, chunked to bound memory."""
    windows = np.asarray(windows)
    out = np.empty(
        (windows.shape[0], params.config.horizon, params.config.target_dim),
        dtype=params.dtype)
    for lo in range(0, windows.shape[0], batch_size):
        out[lo:lo + batch_size] = forward_batch(params, windows[lo:lo + batch_size])[0]
    return out
