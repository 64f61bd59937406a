"""Evaluation task sets: five (initial state, goal state) pairs per env.

Built-in task sets are generated deterministically; they can also be written
to and read from a plain-text file (one ``task`` line per pair).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError, InvalidArgError

N_TASKS = 5
FILE_HEADER = "# deskgcrl tasks v1"


@dataclass(frozen=True)
class TaskSet:
    env_id: str
    pairs: tuple  # 5 tuples of (init_state, goal_state) float vectors
    success_radius: float = 0.5
    jitter: float = 0.0  # uniform +/- jitter on maze positions at reset

    def __post_init__(self):
        if len(self.pairs) != N_TASKS:
            raise InvalidArgError(f"a task set needs exactly {N_TASKS} pairs")

    def get(self, task_index):
        if not 0 <= task_index < N_TASKS:
            raise InvalidArgError(f"task_index must be in 0..{N_TASKS - 1}")
        init, goal = self.pairs[task_index]
        return init.copy(), goal.copy()


def write_tasks(taskset: TaskSet, path):
    lines = [FILE_HEADER, f"env: {taskset.env_id}",
             f"success_radius: {taskset.success_radius!r}",
             f"jitter: {taskset.jitter!r}"]
    for i, (init, goal) in enumerate(taskset.pairs):
        ivals = " ".join(repr(float(v)) for v in init)
        gvals = " ".join(repr(float(v)) for v in goal)
        lines.append(f"task {i} init {ivals} goal {gvals}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_tasks(path) -> TaskSet:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or lines[0] != FILE_HEADER:
        raise FormatError(f"{path}: not a task file")
    meta = {}
    pairs = []
    for ln in lines[1:]:
        if ln.startswith("task "):
            toks = ln.split()
            try:
                gi = toks.index("goal")
                init = np.array([float(v) for v in toks[3:gi]])
                goal = np.array([float(v) for v in toks[gi + 1:]])
            except (ValueError, IndexError):
                raise FormatError(f"{path}: malformed task line {ln!r}") from None
            pairs.append((init, goal))
        elif ":" in ln:
            key, val = ln.split(":", 1)
            meta[key.strip()] = val.strip()
    if "env" not in meta:
        raise FormatError(f"{path}: missing env header")
    return TaskSet(
        env_id=meta["env"],
        pairs=tuple(pairs),
        success_radius=float(meta.get("success_radius", 0.5)),
        jitter=float(meta.get("jitter", 0.0)),
    )


# ---------------------------------------------------------------- builders

MAZE_TASK_CELLS = {
    # (init cell, goal cell) as (row, col); spread of path lengths per layout
    "grid7": (((1, 1), (7, 7)), ((7, 1), (1, 7)), ((1, 7), (5, 5)),
              ((7, 4), (1, 1)), ((3, 4), (7, 7))),
    "medium": (((1, 1), (6, 6)), ((6, 1), (1, 6)), ((1, 5), (5, 1)),
               ((6, 5), (2, 2)), ((4, 6), (1, 1))),
    "large": (((1, 1), (7, 10)), ((7, 1), (1, 10)), ((1, 10), (7, 1)),
              ((5, 1), (3, 10)), ((7, 5), (1, 1))),
    "teleport": (((7, 1), (3, 8)), ((1, 1), (7, 8)), ((3, 10), (7, 1)),
                 ((7, 3), (5, 10)), ((1, 8), (7, 1))),
}


def maze_tasks(layout_name: str) -> TaskSet:
    from .maze import cell_center, get_layout, shortest_cell_path

    layout = get_layout(layout_name)
    pairs = []
    for init_cell, goal_cell in MAZE_TASK_CELLS[layout_name]:
        # reachability guard (routes around black holes)
        shortest_cell_path(layout, init_cell, goal_cell,
                           traversable=lambda code: code in (0, 3, 4))
        pairs.append((cell_center(init_cell), cell_center(goal_cell)))
    return TaskSet(env_id=layout_name, pairs=tuple(pairs),
                   success_radius=0.5, jitter=0.25)


def puzzle_tasks(n: int, m: int) -> TaskSet:
    """All-off starts; goals reached by scripted press sequences, the last one
    pinned to a maximum-distance configuration when the search budget allows."""
    from .lightsout import (EXHAUSTIVE_MAX_CELLS, min_presses, press,
                            puzzle_diameter, random_reachable_goal)

    rng = np.random.default_rng([17, n, m])
    start = np.zeros(n * m, dtype=np.uint8)
    goals = []
    for presses in (1, 2, 3, 4):
        goal = random_reachable_goal(start, n, m, presses, rng)
        while any(np.array_equal(goal, g) for g in goals) or np.array_equal(goal, start):
            goal = random_reachable_goal(start, n, m, presses + 4, rng)
        goals.append(goal)
    if n * m <= EXHAUSTIVE_MAX_CELLS and n * m <= 16:
        target = puzzle_diameter(n, m)
        goal = random_reachable_goal(start, n, m, 8, rng)
        while min_presses(start, goal, n, m) != target:
            goal = random_reachable_goal(start, n, m, int(rng.integers(4, 12)), rng)
        goals.append(goal)
    else:
        goals.append(random_reachable_goal(start, n, m, 12, rng))
    pairs = tuple((start.astype(np.float64), g.astype(np.float64)) for g in goals)
    return TaskSet(env_id=f"puzzle-{n}x{m}", pairs=pairs, success_radius=0.0)


def powder_tasks(difficulty: str) -> TaskSet:
    """Empty-board starts; goals drawn by a deterministic scripted sequence."""
    from .powder import ELEMENT_SETS, PowderGrid, ca_tick, stamp

    elements = ELEMENT_SETS[difficulty]
    rng = np.random.default_rng([23, len(elements)])
    pairs = []
    for task in range(N_TASKS):
        cells = np.zeros((32, 32), dtype=np.uint8)
        n_stamps = 3 + task
        for _ in range(n_stamps):
            e = elements[int(rng.integers(len(elements)))]
            cells = stamp(cells, e, int(rng.integers(8)), int(rng.integers(8)))
            cells = ca_tick(cells, rng)
        for _ in range(10):  # settle
            cells = ca_tick(cells, rng)
        goal = PowderGrid(cells=cells).to_vector()
        init = PowderGrid.empty().to_vector()
        pairs.append((init, goal))
    return TaskSet(env_id=f"powder-{difficulty}", pairs=tuple(pairs), success_radius=0.0)
