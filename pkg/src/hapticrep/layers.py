"""Fully connected and LSTM layer primitives built on the autodiff tape."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import ShapeError, Tensor

ACTIVATIONS = {
    "identity": lambda x: x,
    "tanh": T.tanh,
    "relu": T.relu,
    "softplus": T.softplus,
}


def init_weight(rng, fan_in, fan_out):
    """Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)))


class Dense:
    """One fully connected layer: y = act(x W + b)."""

    def __init__(self, in_size, out_size, activation="identity", rng=None):
        if activation not in ACTIVATIONS:
            raise ValueError("unknown activation %r" % activation)
        self.in_size = in_size
        self.out_size = out_size
        self.activation = activation
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = init_weight(rng, in_size, out_size)
        self.bias = Tensor(np.zeros(out_size))

    def forward(self, x):
        return fc_forward(x, self, self.activation)

    def parameters(self):
        return {"weight": self.weight, "bias": self.bias}


def fc_forward(x, layer, activation=None):
    """Apply a Dense layer to a vector or a batch of row vectors."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.value.shape[-1] != layer.in_size:
        raise ShapeError("fc_forward: input size %d, layer expects %d"
                         % (x.value.shape[-1], layer.in_size))
    act = ACTIVATIONS[layer.activation if activation is None else activation]
    return act(T.add(T.matmul(x, layer.weight), layer.bias))


class LstmCell:
    """Single LSTM cell with combined gate weights.

    Gate order along the 4*hidden axis is (input, forget, candidate,
    output). Forget-gate bias starts at +1. Parameter count is
    4 * hidden * (input + hidden + 1).
    """

    def __init__(self, input_size, hidden_size, rng=None):
        self.input_size = input_size
        self.hidden_size = hidden_size
        rng = rng if rng is not None else np.random.default_rng(0)
        self.w_x = init_weight(rng, input_size, 4 * hidden_size)
        self.w_h = init_weight(rng, hidden_size, 4 * hidden_size)
        bias = np.zeros(4 * hidden_size)
        bias[hidden_size:2 * hidden_size] = 1.0
        self.bias = Tensor(bias)

    def zero_state(self):
        h = np.zeros(self.hidden_size)
        return Tensor(h), Tensor(h.copy())

    def parameters(self):
        return {"w_x": self.w_x, "w_h": self.w_h, "bias": self.bias}

    def parameter_count(self):
        return 4 * self.hidden_size * (self.input_size + self.hidden_size + 1)


def lstm_step(cell, x, h_prev, c_prev):
    """One LSTM recurrence step; returns (h, c)."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.value.shape[-1] != cell.input_size:
        raise ShapeError("lstm_step: input size %d, cell expects %d"
                         % (x.value.shape[-1], cell.input_size))
    if h_prev.value.shape[-1] != cell.hidden_size:
        raise ShapeError("lstm_step: hidden size %d, cell expects %d"
                         % (h_prev.value.shape[-1], cell.hidden_size))
    hs = cell.hidden_size
    pre = T.add(T.add(T.matmul(x, cell.w_x), T.matmul(h_prev, cell.w_h)),
                cell.bias)
    i = T.sigmoid(T.narrow(pre, 0, hs))
    f = T.sigmoid(T.narrow(pre, hs, hs))
    g = T.tanh(T.narrow(pre, 2 * hs, hs))
    o = T.sigmoid(T.narrow(pre, 3 * hs, hs))
    c = T.add(T.mul(f, c_prev), T.mul(i, g))
    h = T.mul(o, T.tanh(c))
    return h, c


def clip_global_norm(grads, max_norm):
    """Scale gradients in place so their global L2 norm is <= max_norm."""
    sq = sum(float(np.sum(g * g)) for g in grads)
    norm = np.sqrt(sq)
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads:
            g *= factor
    return norm
