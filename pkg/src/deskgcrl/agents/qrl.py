"""Quasimetric value learning with a dual-constrained objective.

The negated value -V(s, g) is an IQE distance over encoded states.  Training
maximizes the softplus-shaped distance to random goals subject to the local
constraint E[(d(s, s') - 1)^2] <= eps^2, enforced by a projected-ascent dual
multiplier.  Continuous-action envs additionally fit a latent delta dynamics
model (trained jointly, no stop-gradients) used for deterministic policy
extraction; discrete envs extract with value-only AWR.
"""
from __future__ import annotations

import numpy as np

from ..diffcore import AdamState, MlpSpec, ParamStore, build_mlp
from ..diffcore import tensor as T
from ..errors import UnsupportedOpError
from .core import Agent
from .iqe import iqe_distance, iqe_distance_np
from .losses import (awr_weights, categorical_logprob, gaussian_logprob,
                     weighted_nll)

LAMBDA_MAX = 1e6


class QrlAgent(Agent):
    algorithm = "qrl"

    def _build(self):
        spec = self.spec
        self.latent_dim = spec.iqe_n_components * spec.iqe_component_dim
        self._new_net("phi", self.obs_dim, self.latent_dim, layer_norm=True)
        mix = ParamStore()
        mix.add("mix_raw", np.array(-1.0))
        self.stores["iqe"] = mix
        self.adams["iqe"] = AdamState.for_params(mix, lr=spec.lr)
        if not self.discrete:
            self._new_net("dyn", self.latent_dim + self.action_dim,
                          self.latent_dim, layer_norm=False)
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("policy", 2 * self.obs_dim, out, layer_norm=False)
        self.lam = 0.0

    def value_goal_mixture(self):
        from ..goalsampling import GoalMixture
        return GoalMixture(0.0, 0.0, 0.0, 1.0, gamma=self.spec.gamma)

    # distances -----------------------------------------------------------
    def _dist_t(self, z_a, z_b):
        return iqe_distance(z_a, z_b, self.spec.iqe_n_components,
                            self.spec.iqe_component_dim,
                            mix_param=self.stores["iqe"]["mix_raw"])

    def dist_np(self, obs_a, obs_b):
        za = self._apply("phi", obs_a)
        zb = self._apply("phi", obs_b)
        return iqe_distance_np(za, zb, self.spec.iqe_n_components,
                               self.spec.iqe_component_dim,
                               mix_raw=self.stores["iqe"]["mix_raw"].data)

    def _predict_next_latent(self, z_s, actions):
        a = T.constant(np.asarray(actions, dtype=np.float64))
        delta = self._fwd("dyn", T.concat([z_s, a], axis=-1))
        return T.add(z_s, delta)

    # losses --------------------------------------------------------------
    def value_loss(self, batch):
        """(shaped objective + lam * constraint, constraint tensor)."""
        spec = self.spec
        z_s = self._fwd("phi", batch.obs)
        z_g = self._fwd("phi", batch.goal_obs)
        z_n = self._fwd("phi", batch.next_obs)
        d_sg = self._dist_t(z_s, z_g)
        d_sn = self._dist_t(z_s, z_n)
        k = spec.qrl_softplus_k
        shaped = T.mul(T.softplus(T.mul(T.sub(spec.qrl_margin, d_sg), k)), 1.0 / k)
        constraint = T.mean(T.square(T.sub(d_sn, 1.0)))
        loss = T.add(T.mean(shaped), T.mul(constraint, self.lam))
        return loss, constraint, z_s, z_n

    def dynamics_loss(self, batch, z_s=None, z_n=None):
        if self.discrete:
            raise UnsupportedOpError("the dynamics model needs continuous actions")
        z_s = self._fwd("phi", batch.obs) if z_s is None else z_s
        z_n = self._fwd("phi", batch.next_obs) if z_n is None else z_n
        z_pred = self._predict_next_latent(z_s, batch.actions)
        fwd_term = self._dist_t(z_n, z_pred)
        bwd_term = self._dist_t(z_pred, z_n)
        return T.mean(T.add(fwd_term, bwd_term))

    def value_update(self, batch):
        loss, constraint, z_s, z_n = self.value_loss(batch)
        group = ["phi", "iqe"]
        metrics = {}
        if not self.discrete:
            dyn = self.dynamics_loss(batch, z_s=z_s, z_n=z_n)
            loss = T.add(loss, dyn)
            group.append("dyn")
            metrics["dyn_loss"] = float(dyn.data)
        value = self._step_group(loss, group)
        residual = float(constraint.data) - self.spec.qrl_epsilon ** 2
        dual_lr = self.spec.qrl_dual_lr_mult * self.spec.lr
        self.lam = float(np.clip(self.lam + dual_lr * residual, 0.0, LAMBDA_MAX))
        metrics.update({"value_loss": value, "constraint": float(constraint.data),
                        "lam": self.lam})
        return metrics

    def policy_update(self, batch):
        if self.discrete:
            d_sg = self.dist_np(batch.obs, batch.goal_obs)
            d_ng = self.dist_np(batch.next_obs, batch.goal_obs)
            adv = d_sg - d_ng  # V = -d
            w = awr_weights(adv, self.spec.alpha, self.spec.awr_clip)
            out = self._fwd("policy", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
            loss = self._step_group(weighted_nll(categorical_logprob(out, batch.actions), w),
                                    ["policy"])
            return {"policy_loss": loss, "adv_mean": float(adv.mean())}
        mean = self._fwd("policy", np.concatenate([batch.obs, batch.goal_obs], axis=-1))
        z_s = T.constant(self._apply("phi", batch.obs))
        z_g = T.constant(self._apply("phi", batch.goal_obs))
        delta = self._fwd("dyn", T.concat([z_s, mean], axis=-1))
        d = self._dist_t(T.add(z_s, delta), z_g)
        normalizer = float(np.abs(d.data).mean()) + 1e-8
        logprob = gaussian_logprob(mean, batch.actions)
        loss_t = T.sub(T.mul(T.mean(d), 1.0 / normalizer),
                       T.mul(T.mean(logprob), self.spec.alpha))
        loss = self._step_group(loss_t, ["policy"])
        return {"policy_loss": loss}
