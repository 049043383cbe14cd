"""A small reverse-mode autodiff tensor over float64 numpy arrays.

Only the operations the sequence model needs are provided.  Broadcasting is
supported for the elementwise binary ops; gradients are summed back to the
operand shapes.
"""
from __future__ import annotations

import contextlib

import numpy as np

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Build no graph inside the block; results are plain constant tensors."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def numpy(self):
        return self.data

    def zero_grad(self):
        self.grad = None

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node._accum(g)
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg

    # ---- arithmetic ----
    def __add__(self, other):
        other = _lift(other)
        a, b = self, other
        out = a.data + b.data
        return _make(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))

    __radd__ = __add__

    def __neg__(self):
        return _make(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)
        a, b = self, other
        return _make(a.data * b.data, (a, b),
                     lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))

    __rmul__ = __mul__

    def __matmul__(self, other):
        a, b = self, _lift(other)
        if a.ndim != 2 or b.ndim != 2:
            raise ValueError("matmul supports 2-d operands only")
        return _make(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))

    def __getitem__(self, idx):
        a = self
        basic = all(isinstance(k, (slice, int, type(None), type(Ellipsis)))
                    for k in (idx if isinstance(idx, tuple) else (idx,)))

        def back(g):
            full = np.zeros_like(a.data)
            if basic:
                full[idx] = g
            else:
                np.add.at(full, idx, g)
            return (full,)

        return _make(a.data[idx], (a,), back)

    def reshape(self, *shape):
        a = self
        return _make(a.data.reshape(*shape), (a,), lambda g: (g.reshape(a.shape),))

    def sum(self, axis=None, keepdims=False):
        a = self

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, a.shape),)

        return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), back)

    def mean(self):
        n = self.data.size
        return self.sum() * (1.0 / n)

    # ---- activations ----
    def sigmoid(self):
        s = _sigmoid(self.data)
        return _make(s, (self,), lambda g: (g * s * (1.0 - s),))

    def tanh(self):
        t = np.tanh(self.data)
        return _make(t, (self,), lambda g: (g * (1.0 - t * t),))

    def softmax(self, axis=-1):
        z = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(z)
        s = e / e.sum(axis=axis, keepdims=True)

        def back(g):
            return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

        return _make(s, (self,), back)


def _sigmoid(z):
    # tanh form is overflow-free for any z
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _lift(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward):
    req = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    if not req:
        return Tensor(data)
    return Tensor(data, True, parents, backward)


def parameter(data) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def concat(tensors, axis=-1) -> Tensor:
    tensors = [_lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, cuts, axis=axis))

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), back)


def stack(tensors, axis=0) -> Tensor:
    tensors = [_lift(t) for t in tensors]

    def back(g):
        return tuple(np.take(g, k, axis=axis) for k in range(len(tensors)))

    return _make(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), back)


def bce_with_logits(logits: Tensor, target) -> Tensor:
    """Mean binary cross-entropy of ``sigmoid(logits)`` against (soft) targets."""
    z = logits.data
    y = np.asarray(target, dtype=np.float64)
    loss = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    n = z.size

    def back(g):
        return (g * (_sigmoid(z) - y) / n,)

    return _make(np.asarray(loss.mean()), (logits,), back)


def lstm_cell(x: Tensor, h: Tensor, c: Tensor, Wx: Tensor, Wh: Tensor, b: Tensor) -> Tensor:
    """One LSTM step with gate order (input, forget, cell, output).

    Returns ``[h_new, c_new]`` concatenated on the last axis so a single graph
    node carries both states.
    """
    H = h.shape[-1]
    z = x.data @ Wx.data + h.data @ Wh.data + b.data
    i = _sigmoid(z[:, :H])
    f = _sigmoid(z[:, H:2 * H])
    g = np.tanh(z[:, 2 * H:3 * H])
    o = _sigmoid(z[:, 3 * H:])
    c_new = f * c.data + i * g
    tc = np.tanh(c_new)
    h_new = o * tc

    def back(grad):
        gh, gc = grad[:, :H], grad[:, H:]
        dc = gc + gh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c.data * f * (1.0 - f),
            dc * i * (1.0 - g * g),
            gh * tc * o * (1.0 - o),
        ], axis=1)
        return (dz @ Wx.data.T, dz @ Wh.data.T, dc * f, x.data.T @ dz, h.data.T @ dz, dz.sum(axis=0))

    return _make(np.concatenate([h_new, c_new], axis=1), (x, h, c, Wx, Wh, b), back)
