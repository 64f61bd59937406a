"""Falling-powder drawing grid on a 32x32 board.

One environment step consumes one 8-way sub-action; three sub-actions in
sequence pick the element, the x block, and the y block, after which a 4x4
square of the element is stamped and one cellular-automaton tick runs.
Difficulties differ only in the set of selectable elements (2/5/8); selecting
an out-of-range element is replaced by a uniformly random valid one.

Rule set (one tick, applied to the stamped board):
  * sand falls into air, else diagonally down, else piles;
  * water falls into air, else spreads laterally (random side);
  * fire turns orthogonally adjacent plant into fire and melts adjacent ice
    to water; each fire cell extinguishes to air with probability 1/3;
  * gas rises into air, else diagonally up;
  * plant, stone, and wood are static.
Stone count can therefore only change via stamping overwrites.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidArgError

SIZE = 32
N_SUBACTIONS = 8
BRUSH = 4  # stamped square side
N_PHASES = 3
PHASE_ELEMENT, PHASE_X, PHASE_Y = 0, 1, 2

AIR, SAND, WATER, FIRE, PLANT, STONE, GAS, WOOD, ICE = range(9)
ELEMENT_NAMES = ["air", "sand", "water", "fire", "plant", "stone", "gas", "wood", "ice"]

ELEMENT_SETS = {
    "easy": (PLANT, STONE),
    "medium": (SAND, WATER, FIRE, PLANT, STONE),
    "hard": (SAND, WATER, FIRE, PLANT, STONE, GAS, WOOD, ICE),
}

# fixed palette used by the 3 color channels of the observation encoding
PALETTE = np.array([
    [0.00, 0.00, 0.00],  # air
    [0.90, 0.80, 0.40],  # sand
    [0.20, 0.40, 0.95],  # water
    [1.00, 0.30, 0.05],  # fire
    [0.15, 0.75, 0.20],  # plant
    [0.50, 0.50, 0.55],  # stone
    [0.75, 0.70, 0.90],  # gas
    [0.55, 0.35, 0.15],  # wood
    [0.70, 0.95, 1.00],  # ice
])

FIRE_EXTINGUISH_P = 1.0 / 3.0
DEFAULT_SUCCESS_FRACTION = 0.05
STATE_DIM = SIZE * SIZE + 3  # cells + (selected_element, selected_x, phase)


@dataclass(frozen=True)
class PowderGrid:
    cells: np.ndarray  # uint8 (32, 32)
    selected_element: int = AIR
    selected_x: int = 0
    phase: int = PHASE_ELEMENT

    def to_vector(self) -> np.ndarray:
        vec = np.empty(STATE_DIM)
        vec[: SIZE * SIZE] = self.cells.reshape(-1)
        vec[SIZE * SIZE:] = (self.selected_element, self.selected_x, self.phase)
        return vec

    @classmethod
    def from_vector(cls, vec) -> "PowderGrid":
        vec = np.asarray(vec)
        if vec.size != STATE_DIM:
            raise InvalidArgError(f"powder state vector must have {STATE_DIM} entries")
        cells = vec[: SIZE * SIZE].reshape(SIZE, SIZE).astype(np.uint8)
        se, sx, ph = (int(round(v)) for v in vec[SIZE * SIZE:])
        return cls(cells=cells, selected_element=se, selected_x=sx, phase=ph)

    @classmethod
    def empty(cls) -> "PowderGrid":
        return cls(cells=np.zeros((SIZE, SIZE), dtype=np.uint8))


def stamp(cells, element, x_block, y_block):
    """Overwrite the 4x4 block at block coordinates with ``element``."""
    out = cells.copy()
    r0, c0 = y_block * BRUSH, x_block * BRUSH
    out[r0:r0 + BRUSH, c0:c0 + BRUSH] = element
    return out


def ca_tick(cells, rng):
    """One cellular-automaton update; pure function of (cells, rng draws)."""
    grid = cells.copy()
    moved = np.zeros_like(grid, dtype=bool)

    # fire interactions from the pre-tick configuration; conversions count
    # as the cell's action for this tick
    fire = cells == FIRE
    if fire.any():
        adjacent = np.zeros_like(fire)
        adjacent[1:, :] |= fire[:-1, :]
        adjacent[:-1, :] |= fire[1:, :]
        adjacent[:, 1:] |= fire[:, :-1]
        adjacent[:, :-1] |= fire[:, 1:]
        ignited = adjacent & (cells == PLANT)
        melted = adjacent & (cells == ICE)
        grid[ignited] = FIRE
        grid[melted] = WATER
        moved |= ignited | melted
        out = rng.random(size=int(fire.sum())) < FIRE_EXTINGUISH_P
        rows, cols = np.nonzero(fire)
        grid[rows[out], cols[out]] = AIR

    # gravity: scan bottom-up so a grain falls at most once per tick
    for r in range(SIZE - 2, -1, -1):
        for c in range(SIZE):
            e = grid[r, c]
            if moved[r, c] or e not in (SAND, WATER):
                continue
            if grid[r + 1, c] == AIR:
                grid[r + 1, c], grid[r, c] = e, AIR
                moved[r + 1, c] = True
                continue
            if e == SAND:
                for dc in (-1, 1):
                    cc = c + dc
                    if 0 <= cc < SIZE and grid[r + 1, cc] == AIR and grid[r, cc] == AIR:
                        grid[r + 1, cc], grid[r, c] = SAND, AIR
                        moved[r + 1, cc] = True
                        break
            else:  # water spreads sideways
                side = -1 if rng.random() < 0.5 else 1
                for dc in (side, -side):
                    cc = c + dc
                    if 0 <= cc < SIZE and grid[r, cc] == AIR:
                        grid[r, cc], grid[r, c] = WATER, AIR
                        moved[r, cc] = True
                        break

    # gas rises: scan top-down
    for r in range(1, SIZE):
        for c in range(SIZE):
            if moved[r, c] or grid[r, c] != GAS:
                continue
            if grid[r - 1, c] == AIR:
                grid[r - 1, c], grid[r, c] = GAS, AIR
                moved[r - 1, c] = True
                continue
            for dc in (-1, 1):
                cc = c + dc
                if 0 <= cc < SIZE and grid[r - 1, cc] == AIR and grid[r, cc] == AIR:
                    grid[r - 1, cc], grid[r, c] = GAS, AIR
                    moved[r - 1, cc] = True
                    break
    return grid


def powder_step(grid: PowderGrid, subaction: int, rng, difficulty="medium") -> PowderGrid:
    """Advance one sub-action; stamping and one CA tick happen on phase wrap."""
    subaction = int(subaction)
    if not 0 <= subaction < N_SUBACTIONS:
        raise InvalidArgError(f"subaction must be in 0..{N_SUBACTIONS - 1}")
    elements = ELEMENT_SETS[difficulty]
    if grid.phase == PHASE_ELEMENT:
        if subaction >= len(elements):
            subaction = int(rng.integers(len(elements)))
        return replace(grid, selected_element=elements[subaction], phase=PHASE_X)
    if grid.phase == PHASE_X:
        return replace(grid, selected_x=subaction, phase=PHASE_Y)
    cells = stamp(grid.cells, grid.selected_element, grid.selected_x, subaction)
    cells = ca_tick(cells, rng)
    return PowderGrid(cells=cells, selected_element=grid.selected_element,
                      selected_x=grid.selected_x, phase=PHASE_ELEMENT)


def shifted_match_error(cells, goal_cells) -> int:
    """Goal cells with no equal cell within their 3x3 shifted neighborhood."""
    cells = np.asarray(cells)
    goal = np.asarray(goal_cells)
    if cells.shape != goal.shape:
        raise InvalidArgError("grid and goal dimensions differ")
    matched = np.zeros(goal.shape, dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            src_r = slice(max(0, -dr), min(SIZE, SIZE - dr))
            src_c = slice(max(0, -dc), min(SIZE, SIZE - dc))
            dst_r = slice(max(0, dr), min(SIZE, SIZE + dr))
            dst_c = slice(max(0, dc), min(SIZE, SIZE + dc))
            matched[src_r, src_c] |= goal[src_r, src_c] == cells[dst_r, dst_c]
    return int((~matched).sum())


def powder_success(cells, goal_cells, threshold=None) -> bool:
    if threshold is None:
        threshold = int(round(DEFAULT_SUCCESS_FRACTION * SIZE * SIZE))
    return shifted_match_error(cells, goal_cells) <= threshold


def featurize_powder(vec) -> np.ndarray:
    """32x32x6 observation encoding, flattened.

    Channels 0-2: the element palette color of each cell; channels 3-5: the
    selected element, selected x block, and phase, broadcast over the board.
    """
    vec = np.asarray(vec, dtype=np.float64)
    single = vec.ndim == 1
    batch = vec.reshape(1, -1) if single else vec
    n = batch.shape[0]
    cells = batch[:, : SIZE * SIZE].astype(np.intp)
    obs = np.empty((n, SIZE * SIZE, 6))
    obs[:, :, :3] = PALETTE[cells]
    obs[:, :, 3] = (batch[:, SIZE * SIZE] / 8.0)[:, None]
    obs[:, :, 4] = (batch[:, SIZE * SIZE + 1] / (N_SUBACTIONS - 1))[:, None]
    obs[:, :, 5] = (batch[:, SIZE * SIZE + 2] / (N_PHASES - 1))[:, None]
    flat = obs.reshape(n, SIZE * SIZE * 6)
    return flat[0] if single else flat
