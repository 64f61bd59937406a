"""Interval quasimetric embedding (IQE) distance.

Latents of size n_components * component_dim are split into components; each
component measures the length of the union of intervals [u_i, max(u_i, v_i)]
over its coordinates, and components are combined by a learnable max/mean
blend.  The result is a quasimetric by construction: d(x, x) = 0, d >= 0,
and d(x, z) <= d(x, y) + d(y, z) for every parameter setting.
"""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from ..diffcore.tensor import Tensor, _sigmoid_np
from ..errors import ShapeError


def _component_measures(zx: Tensor, zy: Tensor, n_components, component_dim):
    b = zx.data.shape[0]
    d = n_components * component_dim
    if zx.data.shape[-1] != d or zy.data.shape[-1] != d:
        raise ShapeError(
            f"latent dim {zx.data.shape[-1]} != {n_components}x{component_dim}")
    x = T.reshape(zx, (b * n_components, component_dim))
    y = T.reshape(zy, (b * n_components, component_dim))
    order = np.argsort(x.data, axis=-1, kind="stable")
    u = T.take_along_last(x, order)
    end = T.take_along_last(T.maximum(x, y), order)
    total = T.sub(T.slice_last(end, 0, 1), T.slice_last(u, 0, 1))
    running = T.slice_last(end, 0, 1)
    for i in range(1, component_dim):
        u_i = T.slice_last(u, i, i + 1)
        e_i = T.slice_last(end, i, i + 1)
        total = T.add(total, T.relu(T.sub(e_i, T.maximum(u_i, running))))
        running = T.maximum(running, e_i)
    return T.reshape(total, (b, n_components))


def iqe_distance(zx, zy, n_components, component_dim, mix_param=None) -> Tensor:
    """Batched IQE distance (B, d) x (B, d) -> (B,).

    ``mix_param`` is the raw max/mean blending scalar (sigmoid-squashed);
    None means pure mean reduction.
    """
    comps = _component_measures(T.as_tensor(zx), T.as_tensor(zy),
                                n_components, component_dim)
    comp_mean = T.mean(comps, axis=-1)
    if mix_param is None:
        return comp_mean
    a = T.sigmoid(mix_param)
    comp_max = T.reduce_max(comps, axis=-1)
    return T.add(T.mul(a, comp_max), T.mul(T.sub(1.0, a), comp_mean))


def iqe_distance_np(zx, zy, n_components, component_dim, mix_raw=None):
    """Plain-numpy IQE (same arithmetic as the differentiable path)."""
    zx = np.asarray(zx, dtype=np.float64)
    zy = np.asarray(zy, dtype=np.float64)
    b = zx.shape[0]
    x = zx.reshape(b * n_components, component_dim)
    y = zy.reshape(b * n_components, component_dim)
    order = np.argsort(x, axis=-1, kind="stable")
    u = np.take_along_axis(x, order, axis=-1)
    end = np.take_along_axis(np.maximum(x, y), order, axis=-1)
    total = end[:, :1] - u[:, :1]
    running = end[:, :1]
    for i in range(1, component_dim):
        total = total + np.maximum(end[:, i:i + 1] - np.maximum(u[:, i:i + 1], running), 0.0)
        running = np.maximum(running, end[:, i:i + 1])
    comps = total.reshape(b, n_components)
    comp_mean = comps.mean(axis=-1)
    if mix_raw is None:
        return comp_mean
    a = _sigmoid_np(np.asarray(mix_raw, dtype=np.float64))
    return a * comps.max(axis=-1) + (1.0 - a) * comp_mean
