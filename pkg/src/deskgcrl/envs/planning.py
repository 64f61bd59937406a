"""Exact planners over maze cell graphs, usable as evaluation agents.

All three expose ``act(state, goal, mode="eval", rng=None)`` returning a
discrete move, so they plug into the evaluation harness in place of a learned
agent.  ``DpAgent`` is risk-aware (value iteration over the stochastic
teleport dynamics); ``OptimisticAgent`` plans best-case paths through black
holes; ``BfsAgent`` ignores teleporters entirely.
"""
from __future__ import annotations

import numpy as np

from .maze import (BLACK, DEAD_WHITE, FREE, WALL, WHITE, DISCRETE_MOVES,
                   MazeLayout, bfs_distances, cell_center, position_cell,
                   shortest_cell_path)

# move indices into DISCRETE_MOVES: N, S, E, W, stay
_MOVE_DELTAS = ((-1, 0), (1, 0), (0, 1), (0, -1), (0, 0))


def _move_result(layout, cell, move):
    dr, dc = _MOVE_DELTAS[move]
    nxt = (cell[0] + dr, cell[1] + dc)
    return cell if layout.grid[nxt] == WALL else nxt


def value_iteration(layout: MazeLayout, goal_cell, gamma=0.99, tol=1e-12, max_iters=100000):
    """Optimal discounted values/policy with -1 step reward, goal absorbing.

    Entering a black hole resolves to the uniform mixture over white holes.
    Returns (values dict cell->float, policy dict cell->move index).
    """
    goal_cell = tuple(goal_cell)
    cells = [c for c in layout.free_cells() if layout.grid[c] != BLACK]
    whites = list(layout.white_holes)
    values = {c: 0.0 for c in cells}

    def backup(c, move):
        nxt = _move_result(layout, c, move)
        if layout.grid[nxt] == BLACK:
            return -1.0 + gamma * sum(values[w] for w in whites) / len(whites)
        return -1.0 + gamma * values[nxt]

    for _ in range(max_iters):
        delta = 0.0
        for c in cells:
            if c == goal_cell:
                continue
            best = max(backup(c, mv) for mv in range(5))
            delta = max(delta, abs(best - values[c]))
            values[c] = best
        if delta < tol:
            break
    policy = {}
    for c in cells:
        if c == goal_cell:
            policy[c] = 4
        else:
            policy[c] = int(np.argmax([backup(c, mv) for mv in range(5)]))
    return values, policy


class DpAgent:
    """Follows the value-iteration-optimal policy (expectation over teleports)."""

    def __init__(self, layout: MazeLayout, gamma=0.99):
        self.layout = layout
        self.gamma = gamma
        self._cache = {}

    def act(self, state, goal, mode="eval", rng=None):
        goal_cell = position_cell(goal)
        if goal_cell not in self._cache:
            self._cache[goal_cell] = value_iteration(self.layout, goal_cell, self.gamma)[1]
        policy = self._cache[goal_cell]
        cell = position_cell(state)
        return policy.get(cell, 4)


class OptimisticAgent:
    """Plans the best-case shortest path, treating a black hole as a free hop
    to whichever white hole is most convenient ("lucky outcome" planner)."""

    def __init__(self, layout: MazeLayout):
        self.layout = layout
        self._cache = {}

    def _dist_to_goal(self, goal_cell):
        # optimistic distance-to-go: relax over walk edges and best teleports
        if goal_cell in self._cache:
            return self._cache[goal_cell]
        lay = self.layout
        base = bfs_distances(lay, goal_cell,
                             traversable=lambda code: code != WALL)
        dist = {c: (int(base[c]) if base[c] >= 0 else None)
                for c in lay.free_cells()}
        # iterate: entering a black hole may shortcut via the best white hole
        for _ in range(len(dist)):
            changed = False
            for c in lay.free_cells():
                best = dist[c]
                for mv in range(4):
                    nxt = _move_result(lay, c, mv)
                    if lay.grid[nxt] == BLACK:
                        options = [dist[w] for w in lay.white_holes if dist[w] is not None]
                        cand = 1 + min(options) if options else None
                    else:
                        cand = None if dist[nxt] is None else 1 + dist[nxt]
                    if cand is not None and (best is None or cand < best):
                        best = cand
                if best != dist[c]:
                    dist[c] = best
                    changed = True
            if not changed:
                break
        self._cache[goal_cell] = dist
        return dist

    def act(self, state, goal, mode="eval", rng=None):
        dist = self._dist_to_goal(position_cell(goal))
        cell = position_cell(state)
        if self.layout.grid[cell] == BLACK or dist.get(cell) in (None, 0):
            return 4
        best_mv, best_d = 4, dist[cell]
        for mv in range(4):
            nxt = _move_result(self.layout, cell, mv)
            if self.layout.grid[nxt] == BLACK:
                options = [dist[w] for w in self.layout.white_holes if dist[w] is not None]
                d = min(options) if options else None
            else:
                d = dist[nxt]
            if d is not None and d < best_d:
                best_mv, best_d = mv, d
        return best_mv


class BfsAgent:
    """Follows plain BFS shortest paths on the free-cell graph (no teleports,
    black holes treated as obstacles); the planner-oracle cheat agent."""

    def __init__(self, layout: MazeLayout):
        self.layout = layout

    def act(self, state, goal, mode="eval", rng=None):
        cell, goal_cell = position_cell(state), position_cell(goal)
        if cell == goal_cell:
            return 4
        path = shortest_cell_path(self.layout, cell, goal_cell,
                                  traversable=lambda code: code in (FREE, WHITE, DEAD_WHITE))
        dr = path[1][0] - cell[0]
        dc = path[1][1] - cell[1]
        return {(-1, 0): 0, (1, 0): 1, (0, 1): 2, (0, -1): 3}[(dr, dc)]


class WaypointContinuousAgent:
    """Continuous-action planner oracle: steers toward the next BFS waypoint."""

    def __init__(self, layout: MazeLayout, step_scale=0.5):
        self.layout = layout
        self.step_scale = step_scale

    def act(self, state, goal, mode="eval", rng=None):
        pos = np.asarray(state, dtype=np.float64)
        cell, goal_cell = position_cell(pos), position_cell(goal)
        path = shortest_cell_path(self.layout, cell, goal_cell,
                                  traversable=lambda code: code in (FREE, WHITE, DEAD_WHITE))
        target = np.asarray(goal, dtype=np.float64) if len(path) == 1 else cell_center(path[1])
        delta = (target - pos) / self.step_scale
        return np.clip(delta, -1.0, 1.0)
