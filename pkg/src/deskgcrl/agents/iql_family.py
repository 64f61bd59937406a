"""Goal-conditioned implicit value/Q learning (expectile regression family).

The V-only variant fits V(s, g) by an expectile-weighted temporal-difference
loss against min-of-two target heads and extracts a policy by value-only
advantage-weighted regression.  The Q variant fits V against frozen Q heads
(expectile) and Q by a squared Bellman error through V; extraction is
behavior-constrained deterministic policy gradient with Q normalization on
continuous actions and Q-advantage-weighted regression on discrete ones.
"""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from ..errors import UnsupportedOpError
from .core import Agent, one_hot
from .losses import (awr_weights, categorical_logprob, expectile_loss,
                     gaussian_logprob, weighted_nll)


class GcivlAgent(Agent):
    algorithm = "gcivl"

    def _build(self):
        in_v = 2 * self.obs_dim
        self._new_net("v1", in_v, 1, layer_norm=True)
        self._new_net("v2", in_v, 1, layer_norm=True)
        self._mirror_target("v1")
        self._mirror_target("v2")
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("policy", in_v, out, layer_norm=False)

    # numpy value evaluations -------------------------------------------
    def _v_target_min(self, obs, goal):
        x = np.concatenate([obs, goal], axis=-1)
        return np.minimum(self._apply("v1_t", x)[:, 0], self._apply("v2_t", x)[:, 0])

    def v_mean(self, obs, goal):
        x = np.concatenate([obs, goal], axis=-1)
        return 0.5 * (self._apply("v1", x)[:, 0] + self._apply("v2", x)[:, 0])

    # losses --------------------------------------------------------------
    def value_loss(self, batch):
        target = batch.rewards + self.spec.gamma * batch.masks * \
            self._v_target_min(batch.next_obs, batch.goal_obs)
        x = np.concatenate([batch.obs, batch.goal_obs], axis=-1)
        loss = None
        for head in ("v1", "v2"):
            v = T.reshape(self._fwd(head, x), (-1,))
            term = T.mean(expectile_loss(T.sub(T.constant(target), v), self.spec.kappa))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def value_update(self, batch):
        loss = self._step_group(self.value_loss(batch), ["v1", "v2"])
        return {"value_loss": loss}

    def policy_loss(self, batch):
        adv = self.v_mean(batch.next_obs, batch.goal_obs) - \
            self.v_mean(batch.obs, batch.goal_obs)
        w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
        x = np.concatenate([batch.obs, batch.goal_obs], axis=-1)
        out = self._fwd("policy", x)
        logprob = (categorical_logprob(out, batch.actions) if self.discrete
                   else gaussian_logprob(out, batch.actions))
        return weighted_nll(logprob, w), adv

    def policy_update(self, batch):
        loss, adv = self.policy_loss(batch)
        value = self._step_group(loss, ["policy"])
        return {"policy_loss": value, "adv_mean": float(adv.mean())}


class GciqlAgent(Agent):
    algorithm = "gciql"

    def _build(self):
        in_v = 2 * self.obs_dim
        self._new_net("v1", in_v, 1, layer_norm=True)
        self._new_net("v2", in_v, 1, layer_norm=True)
        if self.discrete:
            in_q, out_q = in_v, self.n_actions
        else:
            in_q, out_q = in_v + self.action_dim, 1
        self._new_net("q1", in_q, out_q, layer_norm=True)
        self._new_net("q2", in_q, out_q, layer_norm=True)
        self._mirror_target("q1")
        self._mirror_target("q2")
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("policy", in_v, out, layer_norm=False)

    @property
    def extraction(self):
        if self.spec.extraction != "auto":
            return self.spec.extraction
        return "awr_q" if self.discrete else "ddpgbc"

    # numpy evaluations --------------------------------------------------
    def _q_apply(self, name, obs, actions, goal):
        if self.discrete:
            q = self._apply(name, np.concatenate([obs, goal], axis=-1))
            return q[np.arange(len(q)), np.asarray(actions).reshape(-1).astype(np.intp)]
        x = np.concatenate([obs, np.asarray(actions, dtype=np.float64), goal], axis=-1)
        return self._apply(name, x)[:, 0]

    def q_target_min(self, obs, actions, goal):
        return np.minimum(self._q_apply("q1_t", obs, actions, goal),
                          self._q_apply("q2_t", obs, actions, goal))

    def q_mean(self, obs, actions, goal):
        return 0.5 * (self._q_apply("q1", obs, actions, goal) +
                      self._q_apply("q2", obs, actions, goal))

    def v_min(self, obs, goal):
        x = np.concatenate([obs, goal], axis=-1)
        return np.minimum(self._apply("v1", x)[:, 0], self._apply("v2", x)[:, 0])

    def v_mean(self, obs, goal):
        x = np.concatenate([obs, goal], axis=-1)
        return 0.5 * (self._apply("v1", x)[:, 0] + self._apply("v2", x)[:, 0])

    # losses --------------------------------------------------------------
    def v_loss(self, batch):
        qbar = self.q_target_min(batch.obs, batch.actions, batch.goal_obs)
        x = np.concatenate([batch.obs, batch.goal_obs], axis=-1)
        loss = None
        for head in ("v1", "v2"):
            v = T.reshape(self._fwd(head, x), (-1,))
            term = T.mean(expectile_loss(T.sub(T.constant(qbar), v), self.spec.kappa))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def q_loss(self, batch):
        target = batch.rewards + self.spec.gamma * batch.masks * \
            self.v_min(batch.next_obs, batch.goal_obs)
        loss = None
        for head in ("q1", "q2"):
            if self.discrete:
                q_all = self._fwd(head, np.concatenate([batch.obs, batch.goal_obs], axis=-1))
                q = T.gather_last(q_all, np.asarray(batch.actions).reshape(-1).astype(np.intp))
            else:
                x = np.concatenate([batch.obs, batch.actions, batch.goal_obs], axis=-1)
                q = T.reshape(self._fwd(head, x), (-1,))
            term = T.mean(T.square(T.sub(T.constant(target), q)))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def value_update(self, batch):
        total = T.add(self.v_loss(batch), self.q_loss(batch))
        value = self._step_group(total, ["v1", "v2", "q1", "q2"])
        return {"value_loss": value}

    def _q_at_policy_mean(self, batch):
        x = np.concatenate([batch.obs, batch.goal_obs], axis=-1)
        mean = self._fwd("policy", x)
        q_in = T.concat([T.constant(batch.obs), mean, T.constant(batch.goal_obs)], axis=-1)
        q = T.minimum(T.reshape(self._fwd("q1", q_in), (-1,)),
                      T.reshape(self._fwd("q2", q_in), (-1,)))
        return mean, q

    def ddpg_normalizer(self, batch):
        _, q = self._q_at_policy_mean(batch)
        return float(np.abs(q.data).mean()) + 1e-8

    def _ddpgbc_loss(self, batch, normalizer=None):
        mean, q = self._q_at_policy_mean(batch)
        if normalizer is None:  # stop-gradient: a detached scale, not a graph node
            normalizer = float(np.abs(q.data).mean()) + 1e-8
        logprob = gaussian_logprob(mean, batch.actions)
        q_term = T.mul(T.mean(q), -1.0 / normalizer)
        return T.sub(q_term, T.mul(T.mean(logprob), self.spec.alpha))

    def policy_update(self, batch):
        if self.extraction == "ddpgbc":
            if self.discrete:
                raise UnsupportedOpError("DDPG+BC needs continuous actions")
            loss = self._step_group(self._ddpgbc_loss(batch), ["policy"])
            return {"policy_loss": loss}
        # Q-advantage-weighted regression (discrete-action extraction)
        adv = self.q_mean(batch.obs, batch.actions, batch.goal_obs) - \
            self.v_mean(batch.obs, batch.goal_obs)
        w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
        out = self._fwd("policy", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
        logprob = (categorical_logprob(out, batch.actions) if self.discrete
                   else gaussian_logprob(out, batch.actions))
        loss = self._step_group(weighted_nll(logprob, w), ["policy"])
        return {"policy_loss": loss, "adv_mean": float(adv.mean())}
