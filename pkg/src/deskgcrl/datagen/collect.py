"""Dataset collection: scripted experts rolled out per variant.

Episodes use per-episode derived rng streams (seed, episode index), so a
dataset is bit-reproducible from (env, spec, seed) and episodes could be
generated in parallel and merged in index order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs.base import GridMazeEnv, LightsOutEnv, PowderEnv
from ..envs.maze import position_cell
from ..errors import InvalidArgError
from .datasets import Dataset, Trajectory
from .experts import (PowderDrawer, PuzzlePresser, advance_plan,
                      maze_expert_action, plan_waypoints, random_free_position,
                      random_goal_cell)

MAZE_EPISODE_LEN = 200
STITCH_MAX_LEN = 40
STITCH_MAX_BFS = 3
PUZZLE_EPISODE_LEN = 100
POWDER_EPISODE_LEN = 150


@dataclass
class CollectorSpec:
    variant: str
    n_transitions: int
    noise_sigma: float = 0.2
    segment_cap: float = 4.0       # stitch: max trajectory span, cell units
    redirect_period: int = 10      # explore: steps between direction draws
    episode_len: int = 0           # 0: per-env default
    noise_mode: str = "gaussian_iid"  # or "temporally_correlated"

    def __post_init__(self):
        if self.n_transitions <= 0:
            raise InvalidArgError("n_transitions must be positive")
        if self.variant == "stitch" and not 0 < self.segment_cap <= 4.0:
            raise InvalidArgError("stitch segment_cap must be in (0, 4] cell units")
        if self.redirect_period < 1:
            raise InvalidArgError("redirect_period must be >= 1")
        if self.noise_sigma < 0:
            raise InvalidArgError("noise_sigma must be >= 0")
        if self.episode_len < 0:
            raise InvalidArgError("episode_len must be >= 0")

    def maze_episode_len(self):
        return self.episode_len or MAZE_EPISODE_LEN

    def flat_episode_len(self, default):
        return self.episode_len or default


def _episode_rng(seed, episode):
    return np.random.default_rng([int(seed), int(episode)])


def collect_dataset(env, spec: CollectorSpec, seed: int) -> Dataset:
    """Whole episodes until at least ``spec.n_transitions`` transitions."""
    if isinstance(env, GridMazeEnv):
        if env.discrete:
            if spec.variant != "navigate":
                raise InvalidArgError("discrete maze supports the navigate variant")
            collect_ep = lambda rng: _maze_discrete_episode(env, spec, rng)
        elif spec.variant in ("navigate", "stitch", "explore"):
            collect_ep = {
                "navigate": _maze_navigate_episode,
                "stitch": _maze_stitch_episode,
                "explore": _maze_explore_episode,
            }[spec.variant]
            collect_ep = (lambda fn: lambda rng: fn(env, spec, rng))(collect_ep)
        else:
            raise InvalidArgError(f"maze does not support variant {spec.variant!r}")
    elif isinstance(env, LightsOutEnv):
        if spec.variant not in ("play", "noisy"):
            raise InvalidArgError(f"puzzle does not support variant {spec.variant!r}")
        collect_ep = lambda rng: _puzzle_episode(env, spec, rng)
    elif isinstance(env, PowderEnv):
        if spec.variant not in ("play", "noisy"):
            raise InvalidArgError(f"powder does not support variant {spec.variant!r}")
        collect_ep = lambda rng: _powder_episode(env, spec, rng)
    else:
        raise InvalidArgError(f"unknown env type {type(env).__name__}")

    trajectories = []
    total = 0
    episode = 0
    while total < spec.n_transitions:
        traj = collect_ep(_episode_rng(seed, episode))
        trajectories.append(traj)
        total += traj.length
        episode += 1
    noise_params = {"noise_sigma": spec.noise_sigma,
                    "segment_cap": spec.segment_cap,
                    "redirect_period": float(spec.redirect_period)}
    return Dataset(env_id=env.env_id, variant=spec.variant, seed=seed,
                   trajectories=trajectories, discrete=env.discrete,
                   noise_params=noise_params)


def _maze_navigate_episode(env, spec, rng):
    layout = env.layout
    pos, _ = random_free_position(layout, rng)
    states, actions = [pos.copy()], []
    plan, goal_cell = [], None
    for _ in range(spec.maze_episode_len()):
        plan = advance_plan(pos, plan)
        if not plan:
            goal_cell = random_goal_cell(layout, rng, exclude=position_cell(pos))
            plan = plan_waypoints(layout, position_cell(pos), goal_cell)
            plan = advance_plan(pos, plan)
        a = maze_expert_action(layout, pos, plan, spec.noise_sigma, rng,
                               step_scale=env.step_scale)
        nxt = env.step(pos, a, rng)
        if np.linalg.norm(nxt - pos) > 1.5:  # teleported: replan next step
            plan = []
        actions.append(a)
        states.append(nxt.copy())
        pos = nxt
    return Trajectory(states=np.array(states), actions=np.array(actions))


def _maze_stitch_episode(env, spec, rng):
    layout = env.layout
    pos, cell = random_free_position(layout, rng)
    start = pos.copy()
    goal_cell = random_goal_cell(layout, rng, max_bfs=STITCH_MAX_BFS, from_cell=cell)
    plan = plan_waypoints(layout, cell, goal_cell)
    states, actions = [pos.copy()], []
    margin = spec.segment_cap - 0.6  # one noisy step cannot overshoot the cap
    for _ in range(STITCH_MAX_LEN):
        plan = advance_plan(pos, plan)
        if not plan or np.linalg.norm(pos - start) > margin:
            break
        a = maze_expert_action(layout, pos, plan, spec.noise_sigma, rng,
                               step_scale=env.step_scale)
        nxt = env.step(pos, a, rng)
        if np.linalg.norm(nxt - start) > spec.segment_cap:
            break
        actions.append(a)
        states.append(nxt.copy())
        pos = nxt
    if not actions:  # degenerate jittered start: hold still one step
        a = np.zeros(2)
        states.append(env.step(pos, a, rng))
        actions.append(a)
    return Trajectory(states=np.array(states), actions=np.array(actions))


def _maze_explore_episode(env, spec, rng):
    layout = env.layout
    pos, _ = random_free_position(layout, rng)
    states, actions = [pos.copy()], []
    direction = np.zeros(2)
    for t in range(spec.maze_episode_len()):
        if t % spec.redirect_period == 0:
            angle = rng.uniform(0.0, 2.0 * np.pi)
            direction = np.array([np.cos(angle), np.sin(angle)])
        a = direction + rng.normal(0.0, spec.noise_sigma, size=2)
        nxt = env.step(pos, a, rng)
        actions.append(a)
        states.append(nxt.copy())
        pos = nxt
    return Trajectory(states=np.array(states), actions=np.array(actions))


def _maze_discrete_episode(env, spec, rng):
    layout = env.layout
    cells = [c for c in layout.free_cells()]
    cell = cells[int(rng.integers(len(cells)))]
    pos = np.array([cell[1] + 0.5, cell[0] + 0.5])
    states, actions = [pos.copy()], []
    plan = []
    move_of = {(-1, 0): 0, (1, 0): 1, (0, 1): 2, (0, -1): 3}
    for _ in range(spec.maze_episode_len()):
        cur = position_cell(pos)
        if len(plan) < 2:
            goal_cell = random_goal_cell(layout, rng, exclude=cur)
            plan = plan_waypoints(layout, cur, goal_cell)
        if rng.random() < min(1.0, spec.noise_sigma):
            a = int(rng.integers(5))
        elif len(plan) >= 2:
            step = (plan[1][0] - cur[0], plan[1][1] - cur[1])
            a = move_of.get(step, 4)
        else:
            a = 4
        nxt = env.step(pos, np.array([a]), rng)
        if position_cell(nxt) == (plan[1] if len(plan) > 1 else cur):
            plan = plan[1:]
        elif position_cell(nxt) != cur:
            plan = []
        actions.append(a)
        states.append(nxt.copy())
        pos = nxt
    return Trajectory(states=np.array(states), actions=np.array(actions, dtype=np.int64))


def _puzzle_episode(env, spec, rng):
    presser = PuzzlePresser(env.n, env.m, spec.variant, rng)
    state = (rng.integers(0, 2, size=env.n * env.m)
             if spec.variant == "play" else np.zeros(env.n * env.m, dtype=np.int64))
    state = state.astype(np.float64)
    states, actions = [state.copy()], []
    for _ in range(spec.flat_episode_len(PUZZLE_EPISODE_LEN)):
        a = presser.act(state)
        state = env.step(state, np.array([a]), rng)
        actions.append(a)
        states.append(state.copy())
    return Trajectory(states=np.array(states), actions=np.array(actions, dtype=np.int64))


def _powder_episode(env, spec, rng):
    from ..envs.powder import PowderGrid
    drawer = PowderDrawer(env.difficulty, spec.variant, rng)
    state = PowderGrid.empty().to_vector()
    states, actions = [state.copy()], []
    for _ in range(spec.flat_episode_len(POWDER_EPISODE_LEN)):
        a = drawer.act(state)
        state = env.step(state, np.array([a]), rng)
        actions.append(a)
        states.append(state.copy())
    return Trajectory(states=np.array(states), actions=np.array(actions, dtype=np.int64))
