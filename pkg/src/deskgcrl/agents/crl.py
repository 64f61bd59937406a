"""Contrastive value learning: binary NCE between geometrically sampled
future goals and within-batch negatives.

The critic is an inner product f(s, a, g) = phi(s, a)^T psi(g) / sqrt(d) with
two independent head pairs (double-value trick).  Its optimum is the log
density ratio log(p_geom(g | s, a) / p_neg(g)).  Continuous-action envs
extract with behavior-constrained deterministic policy gradient on f;
discrete envs use AWR against an extra state-only contrastive head f_V.
"""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from ..errors import InvalidArgError, UnsupportedOpError
from ..goalsampling import GoalMixture
from .core import Agent, one_hot
from .losses import (awr_weights, binary_nce, categorical_logprob,
                     gaussian_logprob, weighted_nll)


class CrlAgent(Agent):
    algorithm = "crl"

    def _build(self):
        d = self.spec.crl_latent_dim
        act_in = self.n_actions if self.discrete else self.action_dim
        for h in ("1", "2"):
            self._new_net(f"phi{h}", self.obs_dim + act_in, d, layer_norm=True)
            self._new_net(f"psi{h}", self.obs_dim, d, layer_norm=True)
        if self.discrete:
            for h in ("1", "2"):
                self._new_net(f"phi_v{h}", self.obs_dim, d, layer_norm=True)
                self._new_net(f"psi_v{h}", self.obs_dim, d, layer_norm=True)
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("policy", 2 * self.obs_dim, out, layer_norm=False)
        self._scale = 1.0 / np.sqrt(d)

    def value_goal_mixture(self):
        return GoalMixture(0.0, 0.0, 1.0, 0.0, gamma=self.spec.gamma)

    def _action_input(self, actions):
        if self.discrete:
            return one_hot(actions, self.n_actions)
        return np.asarray(actions, dtype=np.float64)

    def _logits_t(self, phi_t, psi_t):
        return T.mul(T.tsum(T.mul(phi_t, psi_t), axis=-1), self._scale)

    # numpy critic evaluations -------------------------------------------
    def f_value(self, obs, actions, goal):
        sa = np.concatenate([obs, self._action_input(actions)], axis=-1)
        vals = [(self._apply(f"phi{h}", sa) * self._apply(f"psi{h}", goal)).sum(-1)
                * self._scale for h in ("1", "2")]
        return 0.5 * (vals[0] + vals[1])

    def f_v_value(self, obs, goal):
        vals = [(self._apply(f"phi_v{h}", obs) * self._apply(f"psi_v{h}", goal)).sum(-1)
                * self._scale for h in ("1", "2")]
        return 0.5 * (vals[0] + vals[1])

    # losses --------------------------------------------------------------
    def value_loss(self, batch):
        """NCE loss over both heads; negatives are the batch's goals rolled
        by one row (exchangeable with any within-batch permutation)."""
        if batch.size < 2:
            raise InvalidArgError("contrastive loss needs batch_size >= 2 for negatives")
        sa = np.concatenate([batch.obs, self._action_input(batch.actions)], axis=-1)
        neg_goal = np.roll(batch.goal_obs, 1, axis=0)
        loss = None
        for h in ("1", "2"):
            phi = self._fwd(f"phi{h}", sa)
            psi_pos = self._fwd(f"psi{h}", batch.goal_obs)
            psi_neg = self._fwd(f"psi{h}", neg_goal)
            term = binary_nce(self._logits_t(phi, psi_pos), self._logits_t(phi, psi_neg))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def v_loss(self, batch):
        if not self.discrete:
            raise UnsupportedOpError("the state-only contrastive head is for discrete envs")
        if batch.size < 2:
            raise InvalidArgError("contrastive loss needs batch_size >= 2 for negatives")
        neg_goal = np.roll(batch.goal_obs, 1, axis=0)
        loss = None
        for h in ("1", "2"):
            phi = self._fwd(f"phi_v{h}", batch.obs)
            psi_pos = self._fwd(f"psi_v{h}", batch.goal_obs)
            psi_neg = self._fwd(f"psi_v{h}", neg_goal)
            term = binary_nce(self._logits_t(phi, psi_pos), self._logits_t(phi, psi_neg))
            loss = term if loss is None else T.add(loss, term)
        return loss

    def value_update(self, batch):
        loss = self.value_loss(batch)
        group = ["phi1", "phi2", "psi1", "psi2"]
        metrics = {}
        if self.discrete:
            vloss = self.v_loss(batch)
            metrics["crl_v_loss"] = float(vloss.data)
            loss = T.add(loss, vloss)
            group += ["phi_v1", "phi_v2", "psi_v1", "psi_v2"]
        metrics["value_loss"] = self._step_group(loss, group)
        return metrics

    def policy_update(self, batch):
        if self.discrete:
            adv = self.f_value(batch.obs, batch.actions, batch.goal_obs) - \
                self.f_v_value(batch.obs, batch.goal_obs)
            w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
            out = self._fwd("policy", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
            loss = self._step_group(weighted_nll(categorical_logprob(out, batch.actions), w),
                                    ["policy"])
            return {"policy_loss": loss, "adv_mean": float(adv.mean())}
        mean = self._fwd("policy", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
        obs_t = T.constant(batch.obs)
        fs = []
        for h in ("1", "2"):
            phi = self._fwd(f"phi{h}", T.concat([obs_t, mean], axis=-1))
            psi = T.constant(self._apply(f"psi{h}", batch.goal_obs))
            fs.append(self._logits_t(phi, psi))
        q = T.minimum(fs[0], fs[1])
        normalizer = float(np.abs(q.data).mean()) + 1e-8
        logprob = gaussian_logprob(mean, batch.actions)
        loss_t = T.sub(T.mul(T.mean(q), -1.0 / normalizer),
                       T.mul(T.mean(logprob), self.spec.alpha))
        loss = self._step_group(loss_t, ["policy"])
        return {"policy_loss": loss}
