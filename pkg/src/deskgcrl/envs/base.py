"""Environment wrappers with a uniform interface.

States are flat float64 vectors (maze: 2-D position; puzzle: light bits;
powder: cells plus selection registers).  ``featurize`` maps raw states to
network inputs; for maze and puzzle this is the identity, for powder it is
the 32x32x6 encoding.  Environments hold no mutable state: ``step`` is a pure
function of (state, action, rng).
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgError, UnsupportedOpError
from . import lightsout, powder
from .maze import (DEFAULT_STEP_SCALE, MazeLayout, get_layout, maze_step,
                   maze_success)
from .tasks import TaskSet, maze_tasks, powder_tasks, puzzle_tasks

MAZE_HORIZON = 200
PUZZLE_HORIZON = 100
POWDER_HORIZON = 150


class GridMazeEnv:
    kind = "maze"

    def __init__(self, layout_name: str, mode: str = "continuous",
                 step_scale: float = DEFAULT_STEP_SCALE, tasks: TaskSet | None = None):
        if mode not in ("continuous", "discrete"):
            raise InvalidArgError(f"unknown maze mode {mode!r}")
        self.layout: MazeLayout = get_layout(layout_name)
        self.mode = mode
        self.step_scale = step_scale
        self.env_id = layout_name if mode == "continuous" else f"{layout_name}-disc"
        self.tasks = tasks if tasks is not None else maze_tasks(layout_name)
        self.state_dim = 2
        self.horizon = MAZE_HORIZON
        self.discrete = mode == "discrete"
        self.n_actions = 5 if self.discrete else 0
        self.action_dim = 0 if self.discrete else 2

    @property
    def obs_dim(self):
        return 2

    def reset(self, task_index, randomize, rng):
        init, goal = self.tasks.get(task_index)
        if randomize and self.tasks.jitter > 0 and not self.discrete:
            j = self.tasks.jitter
            init = init + rng.uniform(-j, j, size=2)
            goal = goal + rng.uniform(-j, j, size=2)
        return init, goal

    def step(self, state, action, rng):
        if self.discrete:
            return maze_step(self.layout, state, int(np.asarray(action).reshape(-1)[0]), rng)
        return maze_step(self.layout, state, action, rng, step_scale=self.step_scale)

    def success(self, state, goal):
        return maze_success(state, goal, radius=self.tasks.success_radius)

    def success_batch(self, states, goals):
        d = np.asarray(states, dtype=np.float64) - np.asarray(goals, dtype=np.float64)
        return (d * d).sum(axis=-1) <= self.tasks.success_radius ** 2

    def featurize(self, states):
        return np.asarray(states, dtype=np.float64)

    def oracle_repr(self, state):
        return np.asarray(state, dtype=np.float64)[:2].copy()


class LightsOutEnv:
    kind = "puzzle"
    discrete = True

    def __init__(self, n: int, m: int, tasks: TaskSet | None = None):
        self.n, self.m = n, m
        self.env_id = f"puzzle-{n}x{m}"
        self.tasks = tasks if tasks is not None else puzzle_tasks(n, m)
        self.state_dim = n * m
        self.n_actions = n * m
        self.action_dim = 0
        self.horizon = PUZZLE_HORIZON

    @property
    def obs_dim(self):
        return self.n * self.m

    def reset(self, task_index, randomize, rng):
        return self.tasks.get(task_index)  # discrete tasks are never jittered

    def step(self, state, action, rng):
        idx = int(np.asarray(action).reshape(-1)[0])
        button = divmod(idx, self.m)
        bits = np.asarray(state, dtype=np.float64).round().astype(np.uint8)
        return lightsout.press(bits, self.n, self.m, button).astype(np.float64)

    def success(self, state, goal):
        a = np.asarray(state).round().astype(np.uint8)
        b = np.asarray(goal).round().astype(np.uint8)
        return bool(np.array_equal(a, b))

    def success_batch(self, states, goals):
        a = np.asarray(states).round().astype(np.uint8)
        b = np.asarray(goals).round().astype(np.uint8)
        return (a == b).all(axis=-1)

    def featurize(self, states):
        return np.asarray(states, dtype=np.float64)

    def oracle_repr(self, state):
        return np.asarray(state, dtype=np.float64).copy()


class PowderEnv:
    kind = "powder"
    discrete = True

    def __init__(self, difficulty: str, tasks: TaskSet | None = None):
        if difficulty not in powder.ELEMENT_SETS:
            raise InvalidArgError(f"unknown powder difficulty {difficulty!r}")
        self.difficulty = difficulty
        self.env_id = f"powder-{difficulty}"
        self.tasks = tasks if tasks is not None else powder_tasks(difficulty)
        self.state_dim = powder.STATE_DIM
        self.n_actions = powder.N_SUBACTIONS
        self.action_dim = 0
        self.horizon = POWDER_HORIZON
        self.success_threshold = int(round(powder.DEFAULT_SUCCESS_FRACTION
                                           * powder.SIZE * powder.SIZE))

    @property
    def obs_dim(self):
        return powder.SIZE * powder.SIZE * 6

    def reset(self, task_index, randomize, rng):
        return self.tasks.get(task_index)

    def step(self, state, action, rng):
        grid = powder.PowderGrid.from_vector(state)
        idx = int(np.asarray(action).reshape(-1)[0])
        return powder.powder_step(grid, idx, rng, difficulty=self.difficulty).to_vector()

    def success(self, state, goal):
        a = powder.PowderGrid.from_vector(state).cells
        b = powder.PowderGrid.from_vector(goal).cells
        return powder.powder_success(a, b, threshold=self.success_threshold)

    def success_batch(self, states, goals):
        states = np.atleast_2d(np.asarray(states))
        goals = np.atleast_2d(np.asarray(goals))
        return np.array([self.success(s, g) for s, g in zip(states, goals)])

    def featurize(self, states):
        return powder.featurize_powder(states)

    def oracle_repr(self, state):
        raise UnsupportedOpError("powder has no oracle representation")


def oracle_repr(env, state):
    """Low-dimensional goal representation (maze: x-y; puzzle: light bits)."""
    return env.oracle_repr(state)


_MAZE_NAMES = ("grid7", "medium", "large", "teleport")
_PUZZLES = {"puzzle-3x3": (3, 3), "puzzle-4x4": (4, 4), "puzzle-4x5": (4, 5)}


def env_ids():
    ids = list(_MAZE_NAMES) + [f"{n}-disc" for n in _MAZE_NAMES]
    ids += list(_PUZZLES) + [f"powder-{d}" for d in powder.ELEMENT_SETS]
    return ids


def make_env(env_id: str):
    if env_id in _MAZE_NAMES:
        return GridMazeEnv(env_id, mode="continuous")
    if env_id.endswith("-disc") and env_id[:-5] in _MAZE_NAMES:
        return GridMazeEnv(env_id[:-5], mode="discrete")
    if env_id in _PUZZLES:
        return LightsOutEnv(*_PUZZLES[env_id])
    if env_id.startswith("powder-") and env_id[7:] in powder.ELEMENT_SETS:
        return PowderEnv(env_id[7:])
    raise InvalidArgError(f"unknown env {env_id!r}; have {env_ids()}")
