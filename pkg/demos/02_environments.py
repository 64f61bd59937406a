"""Tour of the three environments and the exact planners.

Run: python demos/02_environments.py
"""
import numpy as np

from deskgcrl.envs import make_env
from deskgcrl.envs.lightsout import effect_matrix, gf2_rank, puzzle_diameter
from deskgcrl.envs.maze import cell_center, maze_step, position_cell
from deskgcrl.envs.planning import BfsAgent, DpAgent, OptimisticAgent
from deskgcrl.envs.powder import SAND, PowderGrid, ca_tick, stamp
from deskgcrl.evalharness import EvalConfig, evaluate

print("=== grid mazes ===")
for name in ("grid7", "medium", "large", "teleport"):
    env = make_env(name)
    print(f"\n{name}:")
    print(env.layout.to_text())

print("\n=== stochastic teleporters ===")
env = make_env("teleport")
rng = np.random.default_rng(0)
pos = cell_center((3, 4))  # one step west of a black hole
landings = {}
for _ in range(9000):
    out = maze_step(env.layout, pos, np.array([-1.0, 0.0]), rng, step_scale=1.0)
    landings[position_cell(out)] = landings.get(position_cell(out), 0) + 1
print("white-hole landing frequencies (expect ~1/3 each):")
for hole, count in sorted(landings.items()):
    print(f"  {hole}: {count / 9000:.3f}")

print("\n=== risk-aware vs optimistic planning on the teleport maze ===")
envd = make_env("teleport-disc")
cfg = EvalConfig(n_rollouts=30)
for agent, label in ((DpAgent(envd.layout), "value-iteration (risk-aware)"),
                     (OptimisticAgent(envd.layout), "best-case hole-seeker"),
                     (BfsAgent(envd.layout), "teleporter-avoiding BFS")):
    rates = evaluate(agent, envd, cfg, np.random.default_rng(1))
    print(f"  {label:32s} success {np.mean(rates):.2f}  per-goal {rates}")

print("\n=== lights-out puzzle structure ===")
for n, m in ((3, 3), (4, 4), (4, 5)):
    rank = gf2_rank(effect_matrix(n, m))
    full = "full rank (every pair solvable)" if rank == n * m else \
        f"rank {rank} of {n * m} (some configurations unreachable)"
    extra = f", press diameter {puzzle_diameter(n, m)}" if n * m <= 16 else ""
    print(f"  {n}x{m}: {full}{extra}")

print("\n=== powder: sand falls and piles ===")
cells = stamp(np.zeros((32, 32), dtype=np.uint8), SAND, 3, 0)
rng = np.random.default_rng(0)
for _ in range(40):
    cells = ca_tick(cells, rng)
rows = sorted(set(np.nonzero(cells == SAND)[0].tolist()))
print(f"  16 sand grains settled in rows {rows} (floor is row 31)")

penv = make_env("powder-medium")
s, g = penv.reset(0, False, np.random.default_rng(0))
goal = PowderGrid.from_vector(g)
print(f"  task-0 goal drawing uses {np.count_nonzero(goal.cells)} non-air cells; "
      f"success tolerance {penv.success_threshold} mismatched cells")
