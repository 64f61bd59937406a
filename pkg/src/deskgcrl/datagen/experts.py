"""Scripted data-collection policies.

Maze experts follow BFS waypoints with Gaussian action noise; the puzzle
presser either mashes buttons (play) or works toward random targets with a
per-episode error rate (noisy); the powder drawer alternates scripted shapes
with uniformly random stamps.
"""
from __future__ import annotations

import numpy as np

from ..envs import lightsout
from ..envs.maze import (FREE, WALL, WHITE, DEAD_WHITE, MazeLayout,
                         cell_center, position_cell, shortest_cell_path)
from ..envs.powder import ELEMENT_SETS, N_SUBACTIONS

WAYPOINT_RADIUS = 0.5
EXPERT_TRAVERSABLE = lambda code: code in (FREE, WHITE, DEAD_WHITE)  # not black holes


def plan_waypoints(layout: MazeLayout, start_cell, goal_cell):
    """Shortest cell path (BFS, N/E/S/W tie order), black holes avoided."""
    return shortest_cell_path(layout, start_cell, goal_cell,
                              traversable=EXPERT_TRAVERSABLE)


def maze_expert_action(layout, state, plan, sigma, rng, step_scale=0.5):
    """Unit-clipped displacement toward the next pending waypoint, plus
    N(0, sigma^2) per-axis noise.  ``plan`` is a sequence of cells; waypoints
    already within 0.5 cells are considered reached."""
    pos = np.asarray(state, dtype=np.float64)
    target = None
    for cell in plan:
        center = cell_center(cell)
        if np.linalg.norm(center - pos) > WAYPOINT_RADIUS:
            target = center
            break
    if target is None:
        base = np.zeros(2)
    else:
        base = np.clip((target - pos) / step_scale, -1.0, 1.0)
    if sigma > 0:
        return base + rng.normal(0.0, sigma, size=2)
    return base


def advance_plan(state, plan):
    """Drop leading waypoints already within 0.5 cells of ``state``."""
    pos = np.asarray(state, dtype=np.float64)
    i = 0
    while i < len(plan) and np.linalg.norm(cell_center(plan[i]) - pos) <= WAYPOINT_RADIUS:
        i += 1
    return plan[i:]


def random_free_position(layout, rng, traversable=EXPERT_TRAVERSABLE):
    """Uniformly random free cell; episodes start at its center, so action
    noise is the only source of off-lattice state coverage."""
    cells = [c for c in layout.free_cells() if traversable(layout.grid[c])]
    cell = cells[int(rng.integers(len(cells)))]
    return cell_center(cell), cell


def random_goal_cell(layout, rng, exclude=None, max_bfs=None, from_cell=None):
    cells = [c for c in layout.free_cells() if EXPERT_TRAVERSABLE(layout.grid[c])]
    if max_bfs is not None:
        from .. import envs
        dist = envs.maze.bfs_distances(layout, from_cell, traversable=EXPERT_TRAVERSABLE)
        cells = [c for c in cells if 1 <= dist[c] <= max_bfs]
    if exclude is not None:
        cells = [c for c in cells if c != exclude] or cells
    return cells[int(rng.integers(len(cells)))]


class PuzzlePresser:
    """Button-press policy.  ``play`` mashes uniformly random buttons;
    ``noisy`` solves toward a random target with per-episode error rate."""

    def __init__(self, n, m, variant, rng, noise_levels=(0.1, 0.2, 0.4)):
        self.n, self.m = n, m
        self.variant = variant
        self.rng = rng
        self.noise_levels = noise_levels
        self.p_error = 0.0
        self.target = None
        if variant == "noisy":
            self.p_error = float(noise_levels[int(rng.integers(len(noise_levels)))])

    def _solution_presses(self, state):
        bits = np.asarray(state).round().astype(np.uint8)
        diff = bits ^ self.target
        x, _ = lightsout.gf2_solve(lightsout.effect_matrix(self.n, self.m), diff)
        return [] if x is None else np.nonzero(x)[0].tolist()

    def act(self, state):
        if self.variant == "play":
            return int(self.rng.integers(self.n * self.m))
        bits = np.asarray(state).round().astype(np.uint8)
        if self.target is None or np.array_equal(bits, self.target):
            self.target = lightsout.random_reachable_goal(
                bits, self.n, self.m, int(self.rng.integers(2, 8)), self.rng)
        if self.rng.random() < self.p_error:
            return int(self.rng.integers(self.n * self.m))
        presses = self._solution_presses(bits)
        if not presses:
            return int(self.rng.integers(self.n * self.m))
        return int(presses[int(self.rng.integers(len(presses)))])


class PowderDrawer:
    """Shape-drawing policy emitting one sub-action per call.

    At every atomic (3-sub-action) decision it either continues the current
    scripted shape or, with probability ``p_random``, stamps a random element
    at a random position.  Decision counts are kept for frequency checks.
    """

    def __init__(self, difficulty, variant, rng, p_random=0.5,
                 noise_levels=(0.1, 0.2, 0.4)):
        self.elements = ELEMENT_SETS[difficulty]
        self.rng = rng
        self.p_random = p_random if variant == "play" else (
            float(noise_levels[int(rng.integers(len(noise_levels)))]))
        self.shape_queue = []
        self.pending = []
        self.n_random = 0
        self.n_decisions = 0

    def _new_shape(self):
        rng = self.rng
        kind = int(rng.integers(3))
        e = int(rng.integers(len(self.elements)))
        stamps = []
        if kind == 0:      # horizontal or vertical line of blocks
            x, y = int(rng.integers(8)), int(rng.integers(8))
            horiz = bool(rng.integers(2))
            length = int(rng.integers(2, 6))
            for i in range(length):
                xx = min(7, x + i) if horiz else x
                yy = y if horiz else min(7, y + i)
                stamps.append((e, xx, yy))
        elif kind == 1:    # filled rectangle
            x0, y0 = int(rng.integers(6)), int(rng.integers(6))
            w, h = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            for yy in range(y0, y0 + h):
                for xx in range(x0, x0 + w):
                    stamps.append((e, xx, yy))
        else:              # scattered squares
            for _ in range(int(rng.integers(1, 4))):
                stamps.append((e, int(rng.integers(8)), int(rng.integers(8))))
        return stamps

    def act(self, state):
        if not self.pending:
            self.n_decisions += 1
            if self.rng.random() < self.p_random:
                self.n_random += 1
                atom = (int(self.rng.integers(len(self.elements))),
                        int(self.rng.integers(8)), int(self.rng.integers(8)))
            else:
                if not self.shape_queue:
                    self.shape_queue = self._new_shape()
                atom = self.shape_queue.pop(0)
            self.pending = list(atom)
        return int(self.pending.pop(0))
