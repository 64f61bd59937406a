"""Single-task reward relabeling.

The semi-sparse reward of a transition is minus the number of unaccomplished
subtasks in the state it lands in: for mazes and powder there is a single
subtask (the success criterion), so rewards are -1 or 0; for the puzzle each
light is a subtask, so rewards range over [-n*m, 0].  Episodes are truncated
at the first completing transition, which is marked terminal.
"""
from __future__ import annotations

import numpy as np

from ..envs.base import GridMazeEnv, LightsOutEnv, PowderEnv
from ..errors import InvalidArgError
from .datasets import Dataset, RewardedDataset, Trajectory


def unaccomplished_subtasks(env, state, goal) -> int:
    if isinstance(env, LightsOutEnv):
        a = np.asarray(state).round().astype(np.uint8)
        b = np.asarray(goal).round().astype(np.uint8)
        return int((a ^ b).sum())
    return 0 if env.success(state, goal) else 1


def n_subtasks(env) -> int:
    return env.n * env.m if isinstance(env, LightsOutEnv) else 1


def relabel_singletask(dataset: Dataset, env, goal_index: int) -> RewardedDataset:
    if not 0 <= goal_index < 5:
        raise InvalidArgError("goal_index must be in 0..4")
    _, goal = env.tasks.get(goal_index)
    trajectories, rewards, terminals = [], [], []
    for traj in dataset.trajectories:
        r = np.array([-unaccomplished_subtasks(env, s, goal)
                      for s in traj.states[1:]], dtype=np.int64)
        done = r == 0
        cut = int(np.argmax(done)) + 1 if done.any() else traj.length
        trajectories.append(Trajectory(states=traj.states[:cut + 1].copy(),
                                       actions=traj.actions[:cut].copy()))
        rewards.append(r[:cut])
        terminals.append(done[:cut])
    return RewardedDataset(
        env_id=dataset.env_id, variant=dataset.variant, seed=dataset.seed,
        trajectories=trajectories, discrete=dataset.discrete,
        noise_params=dict(dataset.noise_params),
        rewards=rewards, terminals=terminals,
        goal_index=goal_index, n_task=n_subtasks(env),
    )
