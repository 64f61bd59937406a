"""Agent base: specs, network bookkeeping, action selection, train loop hooks.

Each agent owns named parameter stores (value heads, target copies, policy
heads), one Adam state per trainable store, and a list of (target, online)
Polyak pairs.  Value targets and advantages are evaluated on the plain-numpy
path; only tensors that need gradients go through the autodiff graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..diffcore import (AdamState, MlpSpec, ParamStore, adam_step, build_mlp,
                        forward, load_params, mlp_apply, polyak_update,
                        save_params)
from ..diffcore import tensor as T
from ..errors import InvalidArgError, UnsupportedOpError
from ..goalsampling import (GoalMixture, sample_hiql_pairs,
                            sample_policy_batch, sample_value_batch)
from .losses import DEFAULT_AWR_CLIP

ALGORITHMS = ("gcbc", "gcivl", "gciql", "qrl", "crl", "hiql")
EXTRACTIONS = ("auto", "awr_v", "awr_q", "ddpgbc")
POWDER_EVAL_TEMPERATURE = 0.3


@dataclass(frozen=True)
class AgentSpec:
    algorithm: str
    gamma: float = 0.99
    kappa: float = 0.9
    extraction: str = "auto"
    alpha: float = 3.0
    tau: float = 0.005
    lr: float = 3e-4
    hidden_dims: tuple = (64, 64)
    value_mixture: tuple = (0.2, 0.0, 0.5, 0.3)
    awr_clip: float = DEFAULT_AWR_CLIP
    qrl_epsilon: float = 0.05
    qrl_margin: float = 100.0
    qrl_softplus_k: float = 0.1
    qrl_dual_lr_mult: float = 10.0
    hiql_k: int = 10
    hiql_repr_dim: int = 10
    crl_latent_dim: int = 16
    iqe_n_components: int = 8
    iqe_component_dim: int = 8

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgError(f"unknown algorithm {self.algorithm!r}")
        if self.extraction not in EXTRACTIONS:
            raise InvalidArgError(f"unknown extraction {self.extraction!r}")
        if not 0.0 < self.kappa < 1.0:
            raise InvalidArgError("expectile kappa must be in (0, 1)")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgError("gamma must be in (0, 1)")
        if self.alpha <= 0:
            raise InvalidArgError("alpha must be positive")
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))
        object.__setattr__(self, "value_mixture", tuple(self.value_mixture))


def one_hot(indices, n):
    indices = np.asarray(indices).reshape(-1).astype(np.intp)
    out = np.zeros((len(indices), n))
    out[np.arange(len(indices)), indices] = 1.0
    return out


class Agent:
    algorithm = "base"
    uses_value_batch = True

    def __init__(self, spec: AgentSpec, env, seed: int):
        self.spec = spec
        self.env = env
        self.discrete = env.discrete
        self.obs_dim = env.obs_dim
        self.n_actions = env.n_actions if self.discrete else 0
        self.action_dim = 0 if self.discrete else env.action_dim
        self.stores: dict[str, ParamStore] = {}
        self.net_specs: dict[str, MlpSpec] = {}
        self.adams: dict[str, AdamState] = {}
        self.target_pairs: list = []  # (target_name, online_name)
        self._seed_iter = iter(np.random.SeedSequence(seed).generate_state(64).tolist())
        self._build()

    # ----------------------------------------------------------- plumbing
    def _new_net(self, name, in_dim, out_dim, layer_norm, trainable=True):
        spec = MlpSpec(in_dim, self.spec.hidden_dims, out_dim, use_layer_norm=layer_norm)
        self.stores[name] = build_mlp(spec, int(next(self._seed_iter)))
        self.net_specs[name] = spec
        if trainable:
            self.adams[name] = AdamState.for_params(self.stores[name], lr=self.spec.lr)

    def _mirror_target(self, online_name):
        tgt = f"{online_name}_t"
        self.stores[tgt] = self.stores[online_name].copy()
        self.net_specs[tgt] = self.net_specs[online_name]
        self.target_pairs.append((tgt, online_name))

    def _apply(self, name, x):
        return mlp_apply(self.stores[name], self.net_specs[name], x)

    def _fwd(self, name, x):
        return forward(self.stores[name], self.net_specs[name], x)

    def _step_group(self, loss, group):
        for name in group:
            self.stores[name].zero_grads()
        loss.backward()
        for name in group:
            adam_step(self.adams[name], self.stores[name], self.stores[name].grads())
        return loss.item()

    def _update_targets(self):
        for tgt, online in self.target_pairs:
            polyak_update(self.stores[tgt], self.stores[online], self.spec.tau)

    def save(self, path):
        save_params(path, self.stores)

    def load(self, path):
        load_params(path, self.stores)

    # ------------------------------------------------------------- hooks
    def _build(self):
        raise NotImplementedError

    def value_update(self, batch) -> dict:
        return {}

    def policy_update(self, batch) -> dict:
        raise NotImplementedError

    def train_step(self, value_batch, policy_batch) -> dict:
        metrics = {}
        if self.uses_value_batch:
            metrics.update(self.value_update(value_batch))
        metrics.update(self.policy_update(policy_batch))
        self._update_targets()
        return metrics

    # --------------------------------------------------------- batching
    def value_goal_mixture(self) -> GoalMixture:
        return GoalMixture(*self.spec.value_mixture, gamma=self.spec.gamma)

    def policy_variant(self, dataset_variant) -> str:
        return dataset_variant

    def sample_batches(self, view, dataset_variant, batch_size, rng):
        vb = None
        if self.uses_value_batch:
            vb = sample_value_batch(view, self.value_goal_mixture(), batch_size, rng)
        pb = sample_policy_batch(view, self.policy_variant(dataset_variant),
                                 batch_size, rng, gamma=self.spec.gamma)
        return vb, pb

    # ------------------------------------------------------------ acting
    def _policy_input(self, state, goal):
        s = self.env.featurize(np.asarray(state, dtype=np.float64))
        g = self.env.featurize(np.asarray(goal, dtype=np.float64))
        return np.concatenate([s, g])

    def _policy_net_out(self, state, goal):
        return self._apply("policy", self._policy_input(state, goal))

    def act(self, state, goal, mode="eval", rng=None):
        """Action for (state, goal).  Eval: Gaussian mean (continuous) or
        argmax (discrete), except powder, which samples at temperature 0.3;
        sample mode draws from the policy head."""
        if mode not in ("eval", "sample"):
            raise InvalidArgError(f"unknown act mode {mode!r}")
        out = self._policy_net_out(state, goal)
        if not self.discrete:
            if mode == "eval":
                return np.clip(out, -1.0, 1.0)
            if rng is None:
                raise InvalidArgError("sample mode needs an rng")
            return np.clip(out + rng.normal(size=out.shape), -1.0, 1.0)
        if mode == "eval" and self.env.kind != "powder":
            return int(np.argmax(out))
        if rng is None:
            raise InvalidArgError("stochastic action selection needs an rng")
        temp = POWDER_EVAL_TEMPERATURE if (mode == "eval") else 1.0
        logits = out / temp
        logits -= logits.max()
        p = np.exp(logits)
        p /= p.sum()
        return int(rng.choice(len(p), p=p))


def softmax_probs(logits, temperature=1.0):
    z = np.asarray(logits, dtype=np.float64) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=-1, keepdims=True)
