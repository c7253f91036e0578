"""Dense float64 tensors with reverse-mode automatic differentiation.

A ``Graph`` is a flat tape of operations recorded in execution order.
Every operation produces a new ``Tensor`` and appends a backward closure
to the active graph; ``Graph.backward`` sweeps the tape in reverse and
returns gradients for a requested list of parameters.

Scope is deliberately narrow: 1-D vectors and 2-D matrices, no general
broadcasting (matrix + row-vector is the one supported special case,
for bias addition), single-threaded per graph.
"""

from __future__ import annotations

import numpy as np


class NumericalError(ValueError):
    """Raised when an operation produces or receives non-finite values."""


class ShapeError(ValueError):
    """Raised on dimension mismatches between operands."""


_ACTIVE_GRAPH = None


class Graph:
    """Tape of recorded operations, in topological (execution) order."""

    def __init__(self):
        self.nodes = []

    def __enter__(self):
        global _ACTIVE_GRAPH
        if _ACTIVE_GRAPH is not None:
            raise RuntimeError("nested Graph contexts are not supported")
        _ACTIVE_GRAPH = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _ACTIVE_GRAPH
        _ACTIVE_GRAPH = None
        return False

    def backward(self, loss, params):
        """Gradients of a scalar ``loss`` with respect to ``params``.

        Parameters never touched by the recorded computation get a zero
        gradient of matching shape.
        """
        if loss.value.ndim != 0 and loss.value.size != 1:
            raise ShapeError("loss must be scalar, got shape %s" % (loss.value.shape,))
        grads = {}

        def grad_of(t):
            g = grads.get(id(t))
            if g is None:
                g = np.zeros_like(t.value)
                grads[id(t)] = g
            return g

        grad_of(loss)[...] = 1.0
        for node in reversed(self.nodes):
            g = grads.get(id(node))
            if g is None or node._backward is None:
                continue
            node._backward(g, grad_of)
        return [grads.get(id(p), np.zeros_like(p.value)) for p in params]


class Tensor:
    """Immutable-by-convention array node in a computation graph."""

    __slots__ = ("value", "parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        arr = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericalError("non-finite values in tensor")
        self.value = arr
        self.parents = parents
        # Outside a Graph context ops run forward-only (inference mode).
        if backward is not None and _ACTIVE_GRAPH is not None:
            self._backward = backward
            _ACTIVE_GRAPH.nodes.append(self)
        else:
            self._backward = None

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return "Tensor(shape=%s)" % (self.value.shape,)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def add(a, b):
    """Elementwise sum; also supports matrix + row-vector (bias add)."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.value.shape != b.value.shape:
        if not (a.value.ndim == 2 and b.value.ndim == 1
                and a.value.shape[1] == b.value.shape[0]):
            raise ShapeError("add: %s vs %s" % (a.value.shape, b.value.shape))

    def backward(g, grad_of):
        grad_of(a)[...] += g
        gb = grad_of(b)
        if g.shape != gb.shape:
            gb[...] += g.sum(axis=0)
        else:
            gb[...] += g
    return Tensor(a.value + b.value, (a, b), backward)


def sub(a, b):
    return add(a, neg(b))


def neg(a):
    a = _as_tensor(a)

    def backward(g, grad_of):
        grad_of(a)[...] -= g
    return Tensor(-a.value, (a,), backward)


def mul(a, b):
    """Elementwise product of same-shape tensors."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.value.shape != b.value.shape:
        raise ShapeError("mul: %s vs %s" % (a.value.shape, b.value.shape))

    def backward(g, grad_of):
        grad_of(a)[...] += g * b.value
        grad_of(b)[...] += g * a.value
    return Tensor(a.value * b.value, (a, b), backward)


def div(a, b):
    return mul(a, reciprocal(b))


def reciprocal(a):
    a = _as_tensor(a)
    out = 1.0 / a.value

    def backward(g, grad_of):
        grad_of(a)[...] -= g * out * out
    return Tensor(out, (a,), backward)


def scale(a, c):
    """Multiply by a python float constant."""
    a = _as_tensor(a)
    c = float(c)

    def backward(g, grad_of):
        grad_of(a)[...] += g * c
    return Tensor(a.value * c, (a,), backward)


def shift(a, c):
    """Add a python float constant."""
    a = _as_tensor(a)
    c = float(c)

    def backward(g, grad_of):
        grad_of(a)[...] += g
    return Tensor(a.value + c, (a,), backward)


def matmul(x, w):
    """x @ w with x a vector or matrix and w a matrix."""
    x, w = _as_tensor(x), _as_tensor(w)
    if w.value.ndim != 2:
        raise ShapeError("matmul: weight must be 2-D, got %s" % (w.value.shape,))
    if x.value.ndim not in (1, 2) or x.value.shape[-1] != w.value.shape[0]:
        raise ShapeError("matmul: %s @ %s" % (x.value.shape, w.value.shape))

    def backward(g, grad_of):
        grad_of(x)[...] += g @ w.value.T
        if x.value.ndim == 1:
            grad_of(w)[...] += np.outer(x.value, g)
        else:
            grad_of(w)[...] += x.value.T @ g
    return Tensor(x.value @ w.value, (x, w), backward)


def concat(parts):
    """Concatenate 1-D tensors (or 2-D along the last axis)."""
    parts = [_as_tensor(p) for p in parts]
    axis = parts[0].value.ndim - 1
    sizes = [p.value.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g, grad_of):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            grad_of(p)[...] += g[..., lo:hi]
    return Tensor(np.concatenate([p.value for p in parts], axis=axis),
                  tuple(parts), backward)


def rows(a, start, size):
    """Contiguous slice of rows (first axis) of a 2-D tensor."""
    a = _as_tensor(a)

    def backward(g, grad_of):
        grad_of(a)[start:start + size] += g
    return Tensor(a.value[start:start + size], (a,), backward)


def row(a, i):
    """Single row of a 2-D tensor, as a 1-D tensor."""
    a = _as_tensor(a)

    def backward(g, grad_of):
        grad_of(a)[i] += g
    return Tensor(a.value[i], (a,), backward)


def narrow(a, start, size):
    """Contiguous slice along the last axis."""
    a = _as_tensor(a)

    def backward(g, grad_of):
        grad_of(a)[..., start:start + size] += g
    return Tensor(a.value[..., start:start + size], (a,), backward)


def stack(parts):
    """Stack 1-D tensors of equal length into a 2-D tensor."""
    parts = [_as_tensor(p) for p in parts]

    def backward(g, grad_of):
        for i, p in enumerate(parts):
            grad_of(p)[...] += g[i]
    return Tensor(np.stack([p.value for p in parts]), tuple(parts), backward)


def total(a):
    """Sum of all elements, as a scalar tensor."""
    a = _as_tensor(a)

    def backward(g, grad_of):
        grad_of(a)[...] += g
    return Tensor(a.value.sum(), (a,), backward)


def mean(a):
    return scale(total(a), 1.0 / a.value.size)


def square(a):
    return mul(a, a)


def tanh(a):
    a = _as_tensor(a)
    out = np.tanh(a.value)

    def backward(g, grad_of):
        grad_of(a)[...] += g * (1.0 - out * out)
    return Tensor(out, (a,), backward)


def sigmoid(a):
    a = _as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.value))

    def backward(g, grad_of):
        grad_of(a)[...] += g * out * (1.0 - out)
    return Tensor(out, (a,), backward)


def relu(a):
    a = _as_tensor(a)
    mask = a.value > 0

    def backward(g, grad_of):
        grad_of(a)[...] += g * mask
    return Tensor(np.where(mask, a.value, 0.0), (a,), backward)


def softplus(a):
    """log(1 + e^x), evaluated overflow-safe."""
    a = _as_tensor(a)
    out = np.logaddexp(0.0, a.value)

    def backward(g, grad_of):
        grad_of(a)[...] += g / (1.0 + np.exp(-a.value))
    return Tensor(out, (a,), backward)


def exp(a):
    a = _as_tensor(a)
    out = np.exp(a.value)

    def backward(g, grad_of):
        grad_of(a)[...] += g * out
    return Tensor(out, (a,), backward)


def log(a):
    a = _as_tensor(a)
    if np.any(a.value <= 0):
        raise NumericalError("log of non-positive value")

    def backward(g, grad_of):
        grad_of(a)[...] += g / a.value
    return Tensor(np.log(a.value), (a,), backward)


def dot(a, b):
    return total(mul(a, b))
