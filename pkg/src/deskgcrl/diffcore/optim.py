"""Adam with bias correction and Polyak target-network updates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgError, ShapeError
from .nets import ParamStore


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ParamStore, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        state = cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        for name, t in params.items():
            state.m[name] = np.zeros_like(t.data)
            state.v[name] = np.zeros_like(t.data)
        return state


def adam_step(state: AdamState, params: ParamStore, grads: dict):
    """One in-place Adam update; returns (params, state)."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for name, t in params.items():
        g = grads[name]
        if g.shape != t.data.shape:
            raise ShapeError(f"grad shape {g.shape} != param shape {t.data.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        t.data -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


def polyak_update(target: ParamStore, online: ParamStore, tau: float):
    """target <- (1 - tau) * target + tau * online, elementwise in place."""
    if not (0.0 <= tau <= 1.0):
        raise InvalidArgError(f"tau must be in [0, 1], got {tau}")
    if target.names() != online.names():
        raise ShapeError("target and online stores have different layouts")
    for name, t in target.items():
        o = online[name].data
        if o.shape != t.data.shape:
            raise ShapeError(f"shape mismatch for {name}")
        t.data *= 1.0 - tau
        t.data += tau * o
    return target
