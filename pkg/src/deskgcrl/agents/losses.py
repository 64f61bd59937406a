"""Loss building blocks shared by the six algorithms."""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from ..diffcore.tensor import Tensor

LOG_2PI = float(np.log(2.0 * np.pi))
DEFAULT_AWR_CLIP = 100.0


def expectile_loss(residual, kappa):
    """|kappa - 1{x < 0}| * x^2, elementwise.

    kappa > 0.5 penalizes positive residuals more, biasing the minimizer
    toward the upper (kappa-) expectile of the target distribution.
    """
    x = T.as_tensor(residual)
    weight = np.where(x.data >= 0.0, kappa, 1.0 - kappa)
    return T.mul(T.constant(weight), T.square(x))


def expectile_of_samples(values, kappa, weights=None, tol=1e-12):
    """kappa-expectile of a sample set by root-finding on the identity
    kappa * E[(y - m)+] = (1 - kappa) * E[(m - y)+]  (independent oracle)."""
    y = np.asarray(values, dtype=np.float64)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)

    def imbalance(m):
        return kappa * (w * np.maximum(y - m, 0.0)).sum() - \
            (1.0 - kappa) * (w * np.maximum(m - y, 0.0)).sum()

    lo, hi = float(y.min()), float(y.max())
    if lo == hi:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if imbalance(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def gaussian_logprob(mean: Tensor, actions: np.ndarray) -> Tensor:
    """Row log-likelihood under a unit-variance Gaussian with mean ``mean``."""
    acts = np.asarray(actions, dtype=np.float64)
    resid = T.sub(mean, T.constant(acts))
    dim = acts.shape[-1]
    sq = T.tsum(T.square(resid), axis=-1)
    return T.sub(T.mul(sq, -0.5), 0.5 * dim * LOG_2PI)


def categorical_logprob(logits: Tensor, actions: np.ndarray) -> Tensor:
    idx = np.asarray(actions).reshape(-1).astype(np.intp)
    return T.gather_last(T.log_softmax(logits), idx)


def awr_weights(advantages: np.ndarray, alpha: float, clip=DEFAULT_AWR_CLIP):
    """exp(alpha * adv) clipped at ``clip``; advantages are never differentiated."""
    return np.minimum(np.exp(alpha * np.asarray(advantages, dtype=np.float64)), clip)


def weighted_nll(logprob: Tensor, weights: np.ndarray) -> Tensor:
    return T.neg(T.mean(T.mul(T.constant(weights), logprob)))


def binary_nce(pos_logits: Tensor, neg_logits: Tensor) -> Tensor:
    """-E[log sigmoid(f+)] - E[log(1 - sigmoid(f-))], numerically stable."""
    pos_term = T.mean(T.softplus(T.neg(pos_logits)))   # -log sigmoid(x) = softplus(-x)
    neg_term = T.mean(T.softplus(neg_logits))          # -log(1 - sigmoid(x)) = softplus(x)
    return T.add(pos_term, neg_term)
