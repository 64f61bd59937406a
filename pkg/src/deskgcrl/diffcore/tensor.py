"""Reverse-mode automatic differentiation over dense float64 numpy arrays.

A ``Tensor`` wraps an ndarray and, when it depends on parameters, a record of
how it was produced.  Calling :func:`backward` on a scalar tensor replays the
record in reverse topological order and accumulates gradients into every
parameter leaf.  Tensors that do not depend on any parameter (batch data,
target-network outputs behind ``stop_gradient``) carry no record, so graphs
stay small.

Supported node kinds: matmul, add/sub/mul/div, pow, neg, exp, log, sqrt, abs,
square, sigmoid, softplus, gelu, maximum/minimum, relu, sum/mean, reduce max,
reshape, concat, slicing, gather, log-softmax, and stop-gradient.  Everything
is float64; mixing precisions is deliberately not supported.
"""
from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..errors import NumericError, ShapeError, UnsupportedOpError

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Tensor:
    """A float64 array plus an optional gradient record."""

    __slots__ = ("data", "grad", "op", "_parents", "_vjp", "needs_grad")

    def __init__(self, data, needs_grad=False, op="leaf", parents=(), vjp=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.op = op
        self.needs_grad = bool(needs_grad)
        self._parents = parents
        self._vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.data.shape})"

    def item(self):
        return float(self.data)

    def detach(self):
        """Constant view of this tensor (stop-gradient)."""
        return Tensor(self.data, op="stop_gradient")

    def backward(self):
        """Accumulate d(self)/d(leaf) into ``grad`` of every parameter leaf.

        ``self`` must be a scalar.  Raises :class:`NumericError` if the value
        is non-finite, naming the first offending node in the graph.
        """
        if self.data.size != 1:
            raise ShapeError(f"backward requires a scalar, got shape {self.shape}")
        if not np.isfinite(self.data):
            raise NumericError(
                f"non-finite loss produced by op '{_first_nonfinite(self)}'",
                op=_first_nonfinite(self),
            )
        order = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in order:
            if node._vjp is None:
                continue
            gs = node._vjp(node.grad)
            for parent, g in zip(node._parents, gs):
                if not parent.needs_grad or g is None:
                    continue
                if parent.grad is None:
                    # copy: a vjp may hand the same array to several parents
                    parent.grad = np.array(g)
                else:
                    parent.grad += g
            if node is not self:
                node.grad = None

    # operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)


def _toposort(root):
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.needs_grad and id(p) not in seen:
                stack.append((p, False))
    return order[::-1]


def _first_nonfinite(root):
    """Op name of an earliest node holding non-finite values."""
    stack, seen = [root], set()
    culprit = root.op
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if not np.all(np.isfinite(node.data)):
            culprit = node.op
            stack.extend(node._parents)
    return culprit


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def constant(x):
    return Tensor(x, op="const")


def parameter(x):
    return Tensor(np.array(x, dtype=np.float64), needs_grad=True, op="param")


def _make(data, parents, vjp, op):
    if any(p.needs_grad for p in parents):
        return Tensor(data, needs_grad=True, op=op, parents=tuple(parents), vjp=vjp)
    return Tensor(data, op=op)


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# elementwise arithmetic -------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
                 "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
                 "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g * b.data, a.data.shape),
                            _unbroadcast(g * a.data, b.data.shape)),
                 "mul")


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g / b.data, a.data.shape),
                            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape)),
                 "div")


def neg(a):
    a = as_tensor(a)
    return _make(-a.data, (a,), lambda g: (-g,), "neg")


def power(a, p):
    a = as_tensor(a)
    p = float(p)
    out = a.data ** p
    return _make(out, (a,), lambda g: (g * p * a.data ** (p - 1.0),), "pow")


def square(a):
    a = as_tensor(a)
    return _make(a.data * a.data, (a,), lambda g: (2.0 * g * a.data,), "square")


def absolute(a):
    a = as_tensor(a)
    return _make(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),), "abs")


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return _make(out, (a,), lambda g: (g * out,), "exp")


def log(a):
    a = as_tensor(a)
    return _make(np.log(a.data), (a,), lambda g: (g / a.data,), "log")


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return _make(out, (a,), lambda g: (g * 0.5 / out,), "sqrt")


def sigmoid(a):
    a = as_tensor(a)
    out = _sigmoid_np(a.data)
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def softplus(a):
    a = as_tensor(a)
    out = _softplus_np(a.data)
    return _make(out, (a,), lambda g: (g * _sigmoid_np(a.data),), "softplus")


def gelu(a):
    """Exact-erf GELU: x * Phi(x)."""
    a = as_tensor(a)
    x = a.data
    phi_cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out = x * phi_cdf
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI

    def vjp(g, phi_cdf=phi_cdf, pdf=pdf, x=x):
        return (g * (phi_cdf + x * pdf),)

    return _make(out, (a,), vjp, "gelu")


def layer_norm(x, scale, offset, eps=1e-5):
    """Normalize the last axis to zero mean / unit variance, then affine.

    Zero-variance rows normalize to zero (the eps keeps the denominator
    positive), so a constant input yields exactly the offset.
    """
    x, scale, offset = as_tensor(x), as_tensor(scale), as_tensor(offset)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = centered * inv
    out = y * scale.data + offset.data

    def vjp(g, y=y, inv=inv, scale_d=scale.data):
        gy = g * scale_d
        dx = (gy - gy.mean(axis=-1, keepdims=True)
              - y * (gy * y).mean(axis=-1, keepdims=True)) * inv
        dscale = _unbroadcast(g * y, scale_d.shape)
        doffset = _unbroadcast(g, scale_d.shape)
        return dx, dscale, doffset

    return _make(out, (x, scale, offset), vjp, "layer_norm")


def maximum(a, b):
    """Elementwise max; the gradient follows the larger input (ties -> a)."""
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data >= b.data
    out = np.where(take_a, a.data, b.data)
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g * take_a, a.data.shape),
                            _unbroadcast(g * ~take_a, b.data.shape)),
                 "maximum")


def minimum(a, b):
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data <= b.data
    out = np.where(take_a, a.data, b.data)
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g * take_a, a.data.shape),
                            _unbroadcast(g * ~take_a, b.data.shape)),
                 "minimum")


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return _make(a.data * mask, (a,), lambda g: (g * mask,), "relu")


# linear algebra / structure ---------------------------------------------

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data
    return _make(out, (a, b),
                 lambda g: (g @ b.data.T, a.data.T @ g),
                 "matmul")


def reshape(a, shape):
    a = as_tensor(a)
    old = a.data.shape
    return _make(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),), "reshape")


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(out, tuple(tensors), vjp, "concat")


def slice_last(a, start, stop):
    a = as_tensor(a)
    out = a.data[..., start:stop]

    def vjp(g):
        full = np.zeros_like(a.data)
        full[..., start:stop] = g
        return (full,)

    return _make(out, (a,), vjp, "slice")


def gather_last(a, index):
    """Pick entries along the last axis: out[...] = a[..., index[...]].

    ``index`` is an integer array shaped like ``a`` without its last axis.
    """
    a = as_tensor(a)
    idx = np.asarray(index, dtype=np.intp)
    if idx.shape != a.data.shape[:-1]:
        raise ShapeError(f"gather index shape {idx.shape} != {a.data.shape[:-1]}")
    out = np.take_along_axis(a.data, idx[..., None], axis=-1)[..., 0]

    def vjp(g):
        full = np.zeros_like(a.data)
        np.put_along_axis(full, idx[..., None], g[..., None], axis=-1)
        return (full,)

    return _make(out, (a,), vjp, "gather")


def take_along_last(a, index):
    """Reorder the last axis by per-row integer indices (same shape as ``a``)."""
    a = as_tensor(a)
    idx = np.asarray(index, dtype=np.intp)
    if idx.shape != a.data.shape:
        raise ShapeError(f"take index shape {idx.shape} != {a.data.shape}")
    out = np.take_along_axis(a.data, idx, axis=-1)

    def vjp(g):
        full = np.zeros_like(a.data)
        np.put_along_axis(full, idx, g, axis=-1)
        return (full,)

    return _make(out, (a,), vjp, "take")


# reductions --------------------------------------------------------------

def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return _make(out, (a,), vjp, "sum")


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reduce_max(a, axis=-1, keepdims=False):
    """Max along one axis; gradient flows to the first argmax."""
    a = as_tensor(a)
    out = a.data.max(axis=axis, keepdims=keepdims)
    idx = a.data.argmax(axis=axis)

    def vjp(g):
        full = np.zeros_like(a.data)
        gg = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(full, np.expand_dims(idx, axis), gg, axis=axis)
        return (full,)

    return _make(out, (a,), vjp, "reduce_max")


def log_softmax(a):
    """Numerically stable log-softmax along the last axis."""
    a = as_tensor(a)
    shift = a.data - a.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shift).sum(axis=-1, keepdims=True))
    out = shift - lse
    sm = np.exp(out)

    def vjp(g):
        return (g - sm * g.sum(axis=-1, keepdims=True),)

    return _make(out, (a,), vjp, "log_softmax")


def stop_gradient(a):
    return as_tensor(a).detach()


def clip_max(a, cap):
    """min(a, cap) for a scalar cap (e.g. advantage-weight clipping)."""
    return minimum(a, constant(np.full_like(as_tensor(a).data, cap)))


# plain-numpy helpers shared with the inference path ----------------------

def _sigmoid_np(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus_np(x):
    return np.logaddexp(0.0, x)


def gelu_np(x):
    return x * 0.5 * (1.0 + erf(x * _INV_SQRT2))


SUPPORTED_OPS = frozenset({
    "add", "sub", "mul", "div", "neg", "pow", "square", "abs", "exp", "log",
    "sqrt", "sigmoid", "softplus", "gelu", "layer_norm", "maximum", "minimum",
    "relu", "matmul", "reshape", "concat", "slice", "gather", "take", "sum",
    "reduce_max", "log_softmax", "stop_gradient", "leaf", "param", "const",
})


def check_supported(op_name):
    if op_name not in SUPPORTED_OPS:
        raise UnsupportedOpError(f"unsupported node kind: {op_name}")
