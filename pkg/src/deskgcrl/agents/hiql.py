"""Hierarchical policy extraction from one expectile value function.

The value function embeds a unit-normalized subgoal representation:
V(s, g) = V~(s, phi(s, g)).  A high-level Gaussian policy predicts the
representation of the k-step-ahead state and a low-level policy produces
actions conditioned on that representation.  In this state-based setting phi
receives gradients only from the value loss.
"""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from ..goalsampling import sample_hiql_pairs, sample_value_batch
from .core import Agent
from .losses import (awr_weights, categorical_logprob, expectile_loss,
                     gaussian_logprob, weighted_nll)

NORM_EPS = 1e-12


def _normalize_rows_np(z):
    return z / np.sqrt((z * z).sum(axis=-1, keepdims=True) + NORM_EPS)


class HiqlAgent(Agent):
    algorithm = "hiql"

    def _build(self):
        rd = self.spec.hiql_repr_dim
        self._new_net("phi", 2 * self.obs_dim, rd, layer_norm=True)
        self._new_net("v1", self.obs_dim + rd, 1, layer_norm=True)
        self._new_net("v2", self.obs_dim + rd, 1, layer_norm=True)
        self._mirror_target("phi")
        self._mirror_target("v1")
        self._mirror_target("v2")
        self._new_net("high", 2 * self.obs_dim, rd, layer_norm=False)
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("low", self.obs_dim + rd, out, layer_norm=False)

    def _normalize_t(self, z):
        n = T.sqrt(T.add(T.tsum(T.square(z), axis=-1, keepdims=True), NORM_EPS))
        return T.div(z, n)

    def repr_np(self, obs, goal, target=False):
        name = "phi_t" if target else "phi"
        return _normalize_rows_np(self._apply(name, np.concatenate([obs, goal], axis=-1)))

    def value_np(self, obs, goal, target=False, reduce="mean"):
        z = self.repr_np(obs, goal, target=target)
        x = np.concatenate([obs, z], axis=-1)
        suffix = "_t" if target else ""
        v1 = self._apply(f"v1{suffix}", x)[:, 0]
        v2 = self._apply(f"v2{suffix}", x)[:, 0]
        return np.minimum(v1, v2) if reduce == "min" else 0.5 * (v1 + v2)

    def value_loss(self, batch):
        target = batch.rewards + self.spec.gamma * batch.masks * \
            self.value_np(batch.next_obs, batch.goal_obs, target=True, reduce="min")
        z = self._normalize_t(self._fwd("phi", np.concatenate([batch.obs, batch.goal_obs], axis=-1)))
        x = T.concat([T.constant(batch.obs), z], axis=-1)
        loss = None
        for head in ("v1", "v2"):
            v = T.reshape(self._fwd(head, x), (-1,))
            term = T.mean(expectile_loss(T.sub(T.constant(target), v), self.spec.kappa))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def value_update(self, batch):
        loss = self._step_group(self.value_loss(batch), ["phi", "v1", "v2"])
        return {"value_loss": loss}

    def high_loss(self, batch):
        adv = self.value_np(batch.subgoal_obs, batch.goal_obs) - \
            self.value_np(batch.obs, batch.goal_obs)
        w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
        z_target = self.repr_np(batch.obs, batch.subgoal_obs)  # exact, no sampling noise
        mean = self._fwd("high", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
        return weighted_nll(gaussian_logprob(mean, z_target), w), adv

    def low_loss(self, batch):
        adv = self.value_np(batch.next_obs, batch.subgoal_obs) - \
            self.value_np(batch.obs, batch.subgoal_obs)
        w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
        z = self.repr_np(batch.obs, batch.subgoal_obs)
        out = self._fwd("low", np.concatenate([batch.obs, z], axis=-1))
        logprob = (categorical_logprob(out, batch.actions) if self.discrete
                   else gaussian_logprob(out, batch.actions))
        return weighted_nll(logprob, w), adv

    def policy_update(self, batch):
        high, high_adv = self.high_loss(batch)
        high_value = self._step_group(high, ["high"])
        low, low_adv = self.low_loss(batch)
        low_value = self._step_group(low, ["low"])
        return {"high_loss": high_value, "low_loss": low_value,
                "adv_mean": float(high_adv.mean()), "low_adv_mean": float(low_adv.mean())}

    def sample_batches(self, view, dataset_variant, batch_size, rng):
        vb = sample_value_batch(view, self.value_goal_mixture(), batch_size, rng)
        pb = sample_hiql_pairs(view, self.spec.hiql_k, batch_size, rng,
                               variant=dataset_variant, gamma=self.spec.gamma)
        return vb, pb

    def act(self, state, goal, mode="eval", rng=None):
        s = self.env.featurize(np.asarray(state, dtype=np.float64))[None, :]
        g = self.env.featurize(np.asarray(goal, dtype=np.float64))[None, :]
        z = _normalize_rows_np(self._apply("high", np.concatenate([s, g], axis=-1)))
        out = self._apply("low", np.concatenate([s, z], axis=-1))[0]
        if not self.discrete:
            if mode == "eval":
                return np.clip(out, -1.0, 1.0)
            return np.clip(out + rng.normal(size=out.shape), -1.0, 1.0)
        if mode == "eval" and self.env.kind != "powder":
            return int(np.argmax(out))
        from .core import POWDER_EVAL_TEMPERATURE, softmax_probs
        temp = POWDER_EVAL_TEMPERATURE if mode == "eval" else 1.0
        p = softmax_probs(out, temp)
        return int(rng.choice(len(p), p=p))
