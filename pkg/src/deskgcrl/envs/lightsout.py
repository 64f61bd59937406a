"""Lights-Out button puzzle: press dynamics and GF(2) solvability analysis.

States are flat 0/1 vectors of length n*m (row-major).  Pressing button
(r, c) flips that cell and its in-bounds orthogonal neighbors.  Because
presses commute and are involutions, reachability reduces to linear algebra
over the two-element field: goal is reachable from start iff start XOR goal
lies in the column space of the button effect matrix.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import CapacityError, InvalidArgError

MAX_CELLS = 24           # state-space bound: 2^24 configurations
EXHAUSTIVE_MAX_CELLS = 20  # min-press search budget (up to 4x5)


def _check_dims(n, m):
    if n < 1 or m < 1 or n * m > MAX_CELLS:
        raise InvalidArgError(f"puzzle must have 1..{MAX_CELLS} cells, got {n}x{m}")


def press(state, n, m, button):
    """Apply one button press; returns a new state vector."""
    _check_dims(n, m)
    state = np.asarray(state, dtype=np.uint8)
    if state.size != n * m:
        raise InvalidArgError(f"state length {state.size} != {n}x{m}")
    r, c = button
    if not (0 <= r < n and 0 <= c < m):
        raise InvalidArgError(f"button {button} out of range for {n}x{m}")
    out = state.copy()
    out[r * m + c] ^= 1
    if r > 0:
        out[(r - 1) * m + c] ^= 1
    if r < n - 1:
        out[(r + 1) * m + c] ^= 1
    if c > 0:
        out[r * m + c - 1] ^= 1
    if c < m - 1:
        out[r * m + c + 1] ^= 1
    return out


def effect_matrix(n, m) -> np.ndarray:
    """(n*m) x (n*m) matrix over F2; column j = cells toggled by button j."""
    _check_dims(n, m)
    size = n * m
    mat = np.zeros((size, size), dtype=np.uint8)
    for r in range(n):
        for c in range(m):
            j = r * m + c
            mat[:, j] = press(np.zeros(size, dtype=np.uint8), n, m, (r, c))
    return mat


def gf2_eliminate(mat, rhs=None):
    """Gauss-Jordan over F2.  Returns (reduced matrix, pivot cols, reduced rhs)."""
    mat = (np.asarray(mat, dtype=np.uint8) % 2).copy()
    rhs = None if rhs is None else (np.asarray(rhs, dtype=np.uint8) % 2).copy()
    n_rows, n_cols = mat.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        hot = np.nonzero(mat[row:, col])[0]
        if hot.size == 0:
            continue
        piv = row + int(hot[0])
        if piv != row:
            mat[[row, piv]] = mat[[piv, row]]
            if rhs is not None:
                rhs[[row, piv]] = rhs[[piv, row]]
        others = np.nonzero(mat[:, col])[0]
        others = others[others != row]
        mat[others] ^= mat[row]
        if rhs is not None:
            rhs[others] ^= rhs[row]
        pivots.append(col)
        row += 1
        if row == n_rows:
            break
    return mat, pivots, rhs


def gf2_rank(mat) -> int:
    return len(gf2_eliminate(mat)[1])


def gf2_solve(mat, b):
    """One solution of mat @ x = b over F2 plus a nullspace basis, or None."""
    mat = np.asarray(mat, dtype=np.uint8)
    red, pivots, rhs = gf2_eliminate(mat, b)
    n_cols = mat.shape[1]
    r = len(pivots)
    if np.any(rhs[r:]):
        return None, _nullspace(red, pivots, n_cols)
    x = np.zeros(n_cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        x[col] = rhs[i]
    return x, _nullspace(red, pivots, n_cols)


def _nullspace(reduced, pivots, n_cols):
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = np.zeros(n_cols, dtype=np.uint8)
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = reduced[i, fc]
        basis.append(v)
    return basis


def solvable(start, goal, n, m) -> bool:
    """True iff ``goal`` is reachable from ``start`` by some press set."""
    start = np.asarray(start, dtype=np.uint8)
    goal = np.asarray(goal, dtype=np.uint8)
    if start.size != goal.size or start.size != n * m:
        raise InvalidArgError("start/goal dimensions do not match the puzzle")
    diff = start ^ goal
    x, _ = gf2_solve(effect_matrix(n, m), diff)
    return x is not None


def min_presses(start, goal, n, m):
    """Minimum number of presses from start to goal, or None if unsolvable.

    Exhausts the solution coset (particular solution plus nullspace span);
    sizes beyond the desk budget raise CapacityError.
    """
    if n * m > EXHAUSTIVE_MAX_CELLS:
        raise CapacityError(f"min-press search supports up to {EXHAUSTIVE_MAX_CELLS} cells")
    start = np.asarray(start, dtype=np.uint8)
    goal = np.asarray(goal, dtype=np.uint8)
    if start.size != goal.size or start.size != n * m:
        raise InvalidArgError("start/goal dimensions do not match the puzzle")
    x, basis = gf2_solve(effect_matrix(n, m), start ^ goal)
    if x is None:
        return None
    best = int(x.sum())
    for k in range(1, len(basis) + 1):
        for combo in combinations(basis, k):
            v = x.copy()
            for b in combo:
                v ^= b
            best = min(best, int(v.sum()))
    return best


def puzzle_diameter(n, m) -> int:
    """Max over solvable pairs of the minimum press count."""
    if n * m > EXHAUSTIVE_MAX_CELLS:
        raise CapacityError(f"diameter search supports up to {EXHAUSTIVE_MAX_CELLS} cells")
    mat = effect_matrix(n, m)
    red, pivots, _ = gf2_eliminate(mat)
    basis = _nullspace(red, pivots, mat.shape[1])
    null_xors = [np.zeros(n * m, dtype=np.uint8)]
    for b in basis:
        null_xors.extend([v ^ b for v in null_xors])
    # min presses for a reachable diff = min weight over its solution coset;
    # enumerate reachable diffs via BFS on the press graph from the origin
    size = n * m
    cols = [mat[:, j] for j in range(size)]
    origin = bytes(size)
    depth = {origin: 0}
    frontier = [np.zeros(size, dtype=np.uint8)]
    worst = 0
    while frontier:
        nxt = []
        for v in frontier:
            d = depth[v.tobytes()]
            for col in cols:
                w = v ^ col
                key = w.tobytes()
                if key not in depth:
                    depth[key] = d + 1
                    worst = max(worst, d + 1)
                    nxt.append(w)
        frontier = nxt
    return worst


def random_reachable_goal(start, n, m, n_presses, rng):
    """Press ``n_presses`` random buttons from ``start`` (always solvable)."""
    state = np.asarray(start, dtype=np.uint8).copy()
    for _ in range(n_presses):
        r = int(rng.integers(n))
        c = int(rng.integers(m))
        state = press(state, n, m, (r, c))
    return state
