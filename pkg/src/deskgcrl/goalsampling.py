"""Hindsight goal-sampling distributions and minibatch assembly.

Four per-anchor goal sources over a trajectory (s_0, a_0, ..., s_T):

* ``cur``:  the anchor state itself (Dirac delta);
* ``traj``: index drawn uniformly from [min(t+1, T-1), T-1], inclusive;
* ``geom``: index min(t+k, T-1) with k ~ Geometric(1-gamma), support k >= 1;
* ``rand``: a state drawn uniformly over all states stored in the dataset.

Anchors are uniform over transitions.  Value batches mix the four sources by
a ratio vector; policy batches use the variant-specific mixture:
(0, 0.5, 0, 0.5) for stitch, (0, 0, 0, 1) for explore, (0, 1, 0, 0) otherwise.
Rows carry the goal-conditioned reward r = success(s, g) - 1 and the matching
bootstrap mask 1 + r (goal rows terminate).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgError

KINDS = ("cur", "traj", "geom", "rand")
KIND_INDEX = {k: i for i, k in enumerate(KINDS)}

POLICY_MIXTURES = {
    "stitch": (0.0, 0.5, 0.0, 0.5),
    "explore": (0.0, 0.0, 0.0, 1.0),
    "navigate": (0.0, 1.0, 0.0, 0.0),
    "play": (0.0, 1.0, 0.0, 0.0),
    "noisy": (0.0, 1.0, 0.0, 0.0),
}

VALUE_MIXTURE_DEFAULT = (0.2, 0.0, 0.5, 0.3)


@dataclass(frozen=True)
class GoalMixture:
    p_cur: float
    p_traj: float
    p_geom: float
    p_rand: float
    gamma: float = 0.99

    def __post_init__(self):
        ratios = self.ratios
        if any(r < 0 for r in ratios):
            raise InvalidArgError(f"mixture ratios must be non-negative: {ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise InvalidArgError(f"mixture ratios must sum to 1: {ratios}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgError(f"gamma must be in (0, 1), got {self.gamma}")

    @property
    def ratios(self):
        return (self.p_cur, self.p_traj, self.p_geom, self.p_rand)


@dataclass
class GoalBatch:
    """Minibatch of (s, a, s', g) rows with relabel metadata.

    All observation fields are featurized for network input; ``kinds`` tags
    each row's goal source.  HIQL batches additionally carry the k-step
    subgoal and its featurization.
    """
    obs: np.ndarray
    actions: np.ndarray
    next_obs: np.ndarray
    goal_obs: np.ndarray
    rewards: np.ndarray
    masks: np.ndarray
    kinds: np.ndarray
    subgoal_obs: np.ndarray | None = None

    @property
    def size(self):
        return len(self.obs)


class DatasetView:
    """Flat index structures over a dataset for vectorized sampling."""

    def __init__(self, dataset, env):
        if not dataset.trajectories:
            raise InvalidArgError("cannot sample from an empty dataset")
        self.dataset = dataset
        self.env = env
        lengths = np.array([t.length for t in dataset.trajectories], dtype=np.intp)
        self.lengths = lengths
        self.states = np.concatenate([t.states for t in dataset.trajectories])
        if dataset.discrete:
            self.actions = np.concatenate([t.actions for t in dataset.trajectories])
        else:
            self.actions = np.concatenate([t.actions for t in dataset.trajectories])
        self.state_offset = np.concatenate([[0], np.cumsum(lengths + 1)])[:-1]
        self.trans_ep = np.repeat(np.arange(len(lengths)), lengths)
        self.trans_t = np.concatenate([np.arange(T) for T in lengths])
        self.n_transitions = int(lengths.sum())
        self.n_states = int((lengths + 1).sum())

    def state_index(self, ep, t):
        return self.state_offset[ep] + t


def _as_view(dataset, env):
    return dataset if isinstance(dataset, DatasetView) else DatasetView(dataset, env)


def _geom_offsets(u, gamma):
    # inverse CDF of Geometric(1 - gamma) with support {1, 2, ...}
    return 1 + np.floor(np.log1p(-u) / np.log(gamma)).astype(np.intp)


def sample_goal(kind, dataset, anchor, gamma, rng, env=None):
    """Draw one goal state for anchor (trajectory index, t)."""
    if kind not in KINDS:
        raise InvalidArgError(f"unknown goal kind {kind!r}")
    view = _as_view(dataset, env)
    ep, t = anchor
    T = int(view.lengths[ep])
    if not 0 <= t < T:
        raise InvalidArgError(f"anchor t={t} outside trajectory of length {T}")
    base = view.state_offset[ep]
    if kind == "cur":
        return view.states[base + t].copy()
    if kind == "traj":
        lo, hi = min(t + 1, T - 1), T - 1
        k = int(rng.integers(lo, hi + 1))
        return view.states[base + k].copy()
    if kind == "geom":
        off = int(_geom_offsets(rng.random(), gamma))
        return view.states[base + min(t + off, T - 1)].copy()
    idx = int(rng.integers(view.n_states))
    return view.states[idx].copy()


def _sample_anchor_rows(view, batch_size, rng):
    idx = rng.integers(view.n_transitions, size=batch_size)
    ep = view.trans_ep[idx]
    t = view.trans_t[idx]
    si = view.state_offset[ep] + t
    return idx, ep, t, si


def _goal_indices(view, ep, t, kinds, gamma, rng):
    """Per-row global state index of the sampled goal."""
    T = view.lengths[ep]
    base = view.state_offset[ep]
    gi = np.empty(len(ep), dtype=np.intp)
    cur = kinds == 0
    gi[cur] = (base + t)[cur]
    traj = kinds == 1
    if traj.any():
        lo = np.minimum(t[traj] + 1, T[traj] - 1)
        hi = T[traj] - 1
        k = rng.integers(lo, hi + 1)
        gi[traj] = base[traj] + k
    geom = kinds == 2
    if geom.any():
        off = _geom_offsets(rng.random(size=int(geom.sum())), gamma)
        gi[geom] = base[geom] + np.minimum(t[geom] + off, T[geom] - 1)
    rand = kinds == 3
    if rand.any():
        gi[rand] = rng.integers(view.n_states, size=int(rand.sum()))
    return gi


def _build_batch(view, idx, ep, t, gi, kinds, subgoal_idx=None):
    env = view.env
    si = view.state_offset[ep] + t
    s = view.states[si]
    g = view.states[gi]
    succ = env.success_batch(s, g)
    rewards = succ.astype(np.float64) - 1.0
    return GoalBatch(
        obs=env.featurize(s),
        actions=view.actions[idx].copy(),
        next_obs=env.featurize(view.states[si + 1]),
        goal_obs=env.featurize(g),
        rewards=rewards,
        masks=-rewards,  # bootstrap everywhere except goal rows (goal absorbs)
        kinds=kinds.copy(),
        subgoal_obs=None if subgoal_idx is None else env.featurize(view.states[subgoal_idx]),
    )


def sample_value_batch(dataset, mixture: GoalMixture, batch_size, rng, env=None) -> GoalBatch:
    """Value-loss minibatch with per-row goal kinds drawn from ``mixture``."""
    if batch_size < 1:
        raise InvalidArgError("batch_size must be >= 1")
    view = _as_view(dataset, env)
    idx, ep, t, si = _sample_anchor_rows(view, batch_size, rng)
    kinds = rng.choice(4, size=batch_size, p=mixture.ratios)
    gi = _goal_indices(view, ep, t, kinds, mixture.gamma, rng)
    return _build_batch(view, idx, ep, t, gi, kinds)


def sample_policy_batch(dataset, variant, batch_size, rng, env=None,
                        gamma=0.99) -> GoalBatch:
    """Policy-extraction minibatch; mixture chosen by the dataset variant."""
    if variant not in POLICY_MIXTURES:
        raise InvalidArgError(f"unknown variant {variant!r}; have {sorted(POLICY_MIXTURES)}")
    mixture = GoalMixture(*POLICY_MIXTURES[variant], gamma=gamma)
    return sample_value_batch(dataset, mixture, batch_size, rng, env=env)


def sample_hiql_pairs(dataset, k, batch_size, rng, env=None,
                      variant="navigate", gamma=0.99) -> GoalBatch:
    """Rows (s_t, a_t, s_{t+1}, s_{min(t+k, T-1)}) plus policy-mixture goals."""
    if k < 1:
        raise InvalidArgError("subgoal step k must be >= 1")
    view = _as_view(dataset, env)
    idx, ep, t, si = _sample_anchor_rows(view, batch_size, rng)
    sub = view.state_offset[ep] + np.minimum(t + k, view.lengths[ep] - 1)
    mixture = GoalMixture(*POLICY_MIXTURES[variant], gamma=gamma)
    kinds = rng.choice(4, size=batch_size, p=mixture.ratios)
    gi = _goal_indices(view, ep, t, kinds, gamma, rng)
    return _build_batch(view, idx, ep, t, gi, kinds, subgoal_idx=sub)
