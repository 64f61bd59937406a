"""Grid mazes with a 2-D point agent, optionally with stochastic teleporters.

Layouts are ASCII grids: ``#`` wall, ``.`` free, ``B`` black hole (entering
teleports the agent), ``W`` white hole (teleport destination), ``D`` dead-end
white hole (a destination inside a sealed pocket).  Positions are continuous
(x, y) in cell units; cell (row, col) spans x in [col, col+1), y in [row,
row+1).  Continuous actions are per-axis displacements clipped to [-1, 1] and
scaled by ``step_scale``; discrete moves are N/S/E/W/stay of one full cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgError, NoPathError

FREE, WALL, BLACK, WHITE, DEAD_WHITE = 0, 1, 2, 3, 4
_CHAR_TO_CODE = {".": FREE, "#": WALL, "B": BLACK, "W": WHITE, "D": DEAD_WHITE}
_CODE_TO_CHAR = {v: k for k, v in _CHAR_TO_CODE.items()}

# expansion order everywhere cells are enumerated: N, E, S, W
NEIGHBOR_STEPS = ((-1, 0), (0, 1), (1, 0), (0, -1))

DEFAULT_STEP_SCALE = 0.5
DEFAULT_SUCCESS_RADIUS = 0.5
_EDGE_EPS = 1e-9

# discrete moves: N, S, E, W, stay
DISCRETE_MOVES = np.array([(0.0, -1.0), (0.0, 1.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0)])


@dataclass(frozen=True)
class MazeLayout:
    name: str
    grid: np.ndarray  # int8 codes, shape (rows, cols)
    cell_size: float = 1.0
    black_holes: tuple = field(default=(), compare=False)
    white_holes: tuple = field(default=(), compare=False)

    @property
    def shape(self):
        return self.grid.shape

    def is_wall(self, row, col):
        return self.grid[row, col] == WALL

    def is_free(self, row, col):
        return self.grid[row, col] != WALL

    def free_cells(self):
        rows, cols = np.nonzero(self.grid != WALL)
        return list(zip(rows.tolist(), cols.tolist()))

    def to_text(self):
        return "\n".join(
            "".join(_CODE_TO_CHAR[int(c)] for c in row) for row in self.grid
        )


def parse_layout(text: str, name: str = "custom") -> MazeLayout:
    """Parse an ASCII layout and validate its invariants."""
    lines = [ln for ln in (l.rstrip() for l in text.strip("\n").splitlines()) if ln]
    widths = {len(ln) for ln in lines}
    if len(widths) != 1:
        raise InvalidArgError("layout rows have unequal widths")
    try:
        grid = np.array([[_CHAR_TO_CODE[ch] for ch in ln] for ln in lines], dtype=np.int8)
    except KeyError as e:
        raise InvalidArgError(f"unknown layout character {e.args[0]!r}") from None
    blacks = tuple(map(tuple, np.argwhere(grid == BLACK).tolist()))
    whites = tuple(map(tuple, np.argwhere((grid == WHITE) | (grid == DEAD_WHITE)).tolist()))
    layout = MazeLayout(name=name, grid=grid, black_holes=blacks, white_holes=whites)
    _validate(layout)
    return layout


def _validate(layout: MazeLayout):
    grid = layout.grid
    rows, cols = grid.shape
    border = np.concatenate([grid[0], grid[-1], grid[:, 0], grid[:, -1]])
    if np.any(border != WALL):
        raise InvalidArgError("layout border must be all walls")
    dead = [c for c in layout.white_holes if grid[c] == DEAD_WHITE]
    if layout.black_holes:
        if len(layout.white_holes) != 3 or len(dead) != 1:
            raise InvalidArgError(
                "teleport layouts need exactly 3 white holes, exactly 1 a dead-end"
            )
    elif layout.white_holes:
        raise InvalidArgError("white holes without black holes")
    # free cells minus the dead-end pocket must form one connected component
    pocket = _component(grid, dead[0]) if dead else set()
    main = [c for c in layout.free_cells() if c not in pocket]
    if main and _component(grid, main[0], exclude=pocket) != set(main):
        raise InvalidArgError("free cells are not connected (outside the dead-end pocket)")


def _component(grid, start, exclude=()):
    seen, queue = {tuple(start)}, [tuple(start)]
    while queue:
        r, c = queue.pop()
        for dr, dc in NEIGHBOR_STEPS:
            nxt = (r + dr, c + dc)
            if grid[nxt] != WALL and nxt not in seen and nxt not in exclude:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def cell_center(cell) -> np.ndarray:
    row, col = cell
    return np.array([col + 0.5, row + 0.5])


def position_cell(pos) -> tuple:
    return (int(pos[1]), int(pos[0]))


def _slide(layout, x, y, dx):
    """Move along x against walls (call with swapped roles for y)."""
    nx = x + dx
    row, col_new = int(y), int(nx)
    if layout.grid[row, col_new] == WALL:
        nx = col_new - _EDGE_EPS if dx > 0 else col_new + 1 + _EDGE_EPS
    return nx


def maze_step(layout: MazeLayout, state, action, rng, step_scale=DEFAULT_STEP_SCALE):
    """One transition.  ``action`` is a 2-vector displacement or a discrete
    move index in {0:N, 1:S, 2:E, 3:W, 4:stay}.

    Movement is axis-separated (x then y) with clamping at wall boundaries;
    landing in a black hole re-sets the position to the center of a uniformly
    random white hole.
    """
    x, y = float(state[0]), float(state[1])
    if np.ndim(action) == 0:
        move = int(action)
        if not 0 <= move < len(DISCRETE_MOVES):
            move = 4
        dx, dy = DISCRETE_MOVES[move]
    else:
        a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        dx, dy = a[0] * step_scale, a[1] * step_scale
    x = _slide(layout, x, y, dx)
    ny = y + dy
    if layout.grid[int(ny), int(x)] == WALL:
        ny = int(ny) - _EDGE_EPS if dy > 0 else int(ny) + 1 + _EDGE_EPS
    y = ny
    if layout.grid[int(y), int(x)] == BLACK:
        hole = layout.white_holes[int(rng.integers(len(layout.white_holes)))]
        return cell_center(hole)
    return np.array([x, y])


def maze_success(state, goal, radius=DEFAULT_SUCCESS_RADIUS) -> bool:
    """Closed ball: true iff Euclidean distance <= radius."""
    if radius <= 0:
        raise InvalidArgError("radius must be positive")
    d = np.asarray(state, dtype=np.float64) - np.asarray(goal, dtype=np.float64)
    return bool(d @ d <= radius * radius)


def bfs_distances(layout: MazeLayout, start_cell, traversable=None) -> np.ndarray:
    """BFS cell distances from ``start_cell`` (-1 where unreachable).

    ``traversable(code) -> bool`` defaults to every non-wall cell; pass a
    custom predicate to e.g. route around black holes.
    """
    if traversable is None:
        traversable = lambda code: code != WALL
    dist = np.full(layout.grid.shape, -1, dtype=np.int64)
    r0, c0 = start_cell
    if not traversable(layout.grid[r0, c0]):
        return dist
    dist[r0, c0] = 0
    queue = [(r0, c0)]
    head = 0
    while head < len(queue):
        r, c = queue[head]
        head += 1
        for dr, dc in NEIGHBOR_STEPS:
            nr, nc = r + dr, c + dc
            if dist[nr, nc] < 0 and traversable(layout.grid[nr, nc]):
                dist[nr, nc] = dist[r, c] + 1
                queue.append((nr, nc))
    return dist


def shortest_cell_path(layout: MazeLayout, start_cell, goal_cell, traversable=None):
    """Shortest cell path by BFS, ties broken by N,E,S,W expansion order."""
    if traversable is None:
        traversable = lambda code: code != WALL
    start_cell, goal_cell = tuple(start_cell), tuple(goal_cell)
    if not traversable(layout.grid[start_cell]) or not traversable(layout.grid[goal_cell]):
        raise NoPathError(f"{start_cell} -> {goal_cell}: endpoint not traversable")
    dist = bfs_distances(layout, start_cell, traversable)
    if dist[goal_cell] < 0:
        raise NoPathError(f"no path {start_cell} -> {goal_cell} in {layout.name}")
    # walk back from the goal, preferring the N,E,S,W-first predecessor
    path = [goal_cell]
    cur = goal_cell
    while cur != start_cell:
        d = dist[cur]
        for dr, dc in NEIGHBOR_STEPS:
            prev = (cur[0] + dr, cur[1] + dc)
            if traversable(layout.grid[prev]) and dist[prev] == d - 1:
                cur = prev
                break
        path.append(cur)
    return path[::-1]


_GRID7 = """
#########
#.......#
#.###.#.#
#.#...#.#
#...#.#.#
#.#.#...#
#.#.###.#
#.......#
#########
"""

_MEDIUM = """
########
#..##..#
#..#...#
##...###
#..#...#
#.#..#.#
#...#..#
########
"""

_LARGE = """
############
#....#.....#
#.##.#.#.#.#
#......#...#
#.####.###.#
#....#.....#
##.#.#.#.#.#
#...#...#..#
############
"""

_TELEPORT = """
############
#....#.....#
#.##.#.###.#
#.#B.....#.#
#.#.###.##.#
#W..#B..#W.#
#.#.###.####
#....#...#D#
############
"""

BUILTIN_LAYOUT_TEXT = {
    "grid7": _GRID7,
    "medium": _MEDIUM,
    "large": _LARGE,
    "teleport": _TELEPORT,
}


def get_layout(name: str) -> MazeLayout:
    if name not in BUILTIN_LAYOUT_TEXT:
        raise InvalidArgError(f"unknown layout {name!r}; have {sorted(BUILTIN_LAYOUT_TEXT)}")
    return parse_layout(BUILTIN_LAYOUT_TEXT[name], name=name)
