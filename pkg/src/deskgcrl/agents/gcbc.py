"""Goal-conditioned behavioral cloning: log-likelihood of dataset actions
under pi(a | s, g) with future states of the same trajectory as goals."""
from __future__ import annotations

import numpy as np

from ..diffcore import tensor as T
from .core import Agent
from .losses import categorical_logprob, gaussian_logprob


class GcbcAgent(Agent):
    algorithm = "gcbc"
    uses_value_batch = False

    def _build(self):
        out = self.n_actions if self.discrete else self.action_dim
        self._new_net("policy", 2 * self.obs_dim, out, layer_norm=False)

    def policy_variant(self, dataset_variant):
        return "navigate"  # cloning always conditions on in-trajectory futures

    def policy_loss(self, batch):
        x = np.concatenate([batch.obs, batch.goal_obs], axis=-1)
        out = self._fwd("policy", x)
        if self.discrete:
            logprob = categorical_logprob(out, batch.actions)
        else:
            logprob = gaussian_logprob(out, batch.actions)
        return T.neg(T.mean(logprob))

    def policy_update(self, batch):
        loss = self._step_group(self.policy_loss(batch), ["policy"])
        return {"policy_loss": loss}
