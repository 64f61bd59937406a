"""MLP construction and evaluation on top of the autodiff tensors.

Networks are GELU MLPs with optional per-hidden-layer layer normalization
(used for value networks only).  Initialization is scaled-uniform fan-in:
weights ~ U(-sqrt(1/fan_in), +sqrt(1/fan_in)), biases zero, layer-norm scale
one and offset zero.  The same seed always yields bit-identical parameters.
"""
from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidSpecError, ShapeError
from . import tensor as T
from .tensor import Tensor

LAYER_NORM_EPS = 1e-5


class Activation(enum.Enum):
    GELU = "gelu"


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_dims: tuple
    output_dim: int
    use_layer_norm: bool = False
    activation: Activation = Activation.GELU

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if len(self.hidden_dims) == 0:
            raise InvalidSpecError("hidden_dims must be non-empty")
        if any(int(d) < 1 for d in dims):
            raise InvalidSpecError(f"all layer dims must be >= 1, got {dims}")

    @property
    def layer_dims(self):
        return (self.input_dim, *self.hidden_dims, self.output_dim)


class ParamStore:
    """Named parameter tensors with a deterministic iteration order."""

    def __init__(self):
        self._params: OrderedDict[str, Tensor] = OrderedDict()

    def add(self, name, array):
        if name in self._params:
            raise InvalidSpecError(f"duplicate parameter name {name!r}")
        self._params[name] = T.parameter(array)
        return self._params[name]

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def tensors(self):
        return list(self._params.values())

    @property
    def total_count(self):
        return sum(t.data.size for t in self._params.values())

    def zero_grads(self):
        for t in self._params.values():
            t.grad = None

    def grads(self):
        """Gradient arrays aligned with names (zeros where untouched)."""
        return {n: (t.grad if t.grad is not None else np.zeros_like(t.data))
                for n, t in self._params.items()}

    def copy(self):
        out = ParamStore()
        for n, t in self._params.items():
            out.add(n, t.data.copy())
        return out

    def load_from(self, other):
        if self.names() != other.names():
            raise ShapeError("parameter stores have different layouts")
        for n, t in self._params.items():
            src = other[n].data
            if src.shape != t.data.shape:
                raise ShapeError(f"shape mismatch for {n}: {src.shape} vs {t.data.shape}")
            t.data[...] = src

    def to_flat(self):
        if not self._params:
            return np.zeros(0)
        return np.concatenate([t.data.ravel() for t in self._params.values()])

    def load_flat(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.total_count:
            raise ShapeError(f"flat vector has {flat.size} values, store holds {self.total_count}")
        off = 0
        for t in self._params.values():
            n = t.data.size
            t.data[...] = flat[off:off + n].reshape(t.data.shape)
            off += n

    def layout(self):
        return [(n, tuple(t.data.shape)) for n, t in self._params.items()]


def build_mlp(spec: MlpSpec, seed: int) -> ParamStore:
    """Initialize MLP parameters for ``spec`` from ``seed``.

    Layer i holds w{i} of shape (fan_in, fan_out) and b{i}; hidden layers with
    layer norm enabled additionally hold ln_scale{i} / ln_offset{i}.
    """
    rng = np.random.default_rng(seed)
    store = ParamStore()
    dims = spec.layer_dims
    n_layers = len(dims) - 1
    for i in range(n_layers):
        fan_in, fan_out = dims[i], dims[i + 1]
        bound = np.sqrt(1.0 / fan_in)
        store.add(f"w{i}", rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        store.add(f"b{i}", np.zeros(fan_out))
        if spec.use_layer_norm and i < n_layers - 1:
            store.add(f"ln_scale{i}", np.ones(fan_out))
            store.add(f"ln_offset{i}", np.zeros(fan_out))
    return store


def param_count(spec: MlpSpec) -> int:
    dims = spec.layer_dims
    n = 0
    for i in range(len(dims) - 1):
        n += dims[i] * dims[i + 1] + dims[i + 1]
        if spec.use_layer_norm and i < len(dims) - 2:
            n += 2 * dims[i + 1]
    return n


def forward(params: ParamStore, spec: MlpSpec, x) -> Tensor:
    """Differentiable MLP forward pass.

    The returned tensor carries the replayable computation record; calling
    ``.backward()`` on any scalar derived from it yields parameter gradients.
    """
    x = T.as_tensor(x)
    if x.data.ndim != 2:
        x = T.reshape(x, (-1, spec.input_dim) if x.data.size else (0, spec.input_dim))
    if x.data.shape[-1] != spec.input_dim:
        raise ShapeError(f"input last dim {x.data.shape[-1]} != spec.input_dim {spec.input_dim}")
    h = x
    n_layers = len(spec.layer_dims) - 1
    for i in range(n_layers):
        h = T.add(T.matmul(h, params[f"w{i}"]), params[f"b{i}"])
        if i < n_layers - 1:
            h = T.gelu(h)
            if spec.use_layer_norm:
                h = T.layer_norm(h, params[f"ln_scale{i}"], params[f"ln_offset{i}"],
                                 eps=LAYER_NORM_EPS)
    return h


def mlp_apply(params: ParamStore, spec: MlpSpec, x: np.ndarray) -> np.ndarray:
    """Plain-numpy forward pass (no record); used for action selection."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[-1] != spec.input_dim:
        raise ShapeError(f"input last dim {x.shape[-1]} != spec.input_dim {spec.input_dim}")
    h = x
    n_layers = len(spec.layer_dims) - 1
    for i in range(n_layers):
        h = h @ params[f"w{i}"].data + params[f"b{i}"].data
        if i < n_layers - 1:
            h = T.gelu_np(h)
            if spec.use_layer_norm:
                mu = h.mean(axis=-1, keepdims=True)
                c = h - mu
                var = (c * c).mean(axis=-1, keepdims=True)
                y = c * (1.0 / np.sqrt(var + LAYER_NORM_EPS))
                h = y * params[f"ln_scale{i}"].data + params[f"ln_offset{i}"].data
    return h[0] if squeeze else h


def value_and_grad(loss_fn, params, batch=None):
    """Evaluate ``loss_fn`` and return (loss value, gradients).

    ``params`` may be a single ParamStore or a dict of stores; the returned
    gradients mirror that structure as name -> array dicts.  ``loss_fn`` is
    called as ``loss_fn(params, batch)`` (or ``loss_fn(params)`` when batch is
    None) and must return a scalar Tensor.
    """
    stores = params if isinstance(params, dict) else {"params": params}
    for store in stores.values():
        store.zero_grads()
    loss = loss_fn(params, batch) if batch is not None else loss_fn(params)
    if not isinstance(loss, Tensor):
        raise ShapeError("loss_fn must return a Tensor")
    loss.backward()
    grads = {name: store.grads() for name, store in stores.items()}
    if not isinstance(params, dict):
        return loss.item(), grads["params"]
    return loss.item(), grads
