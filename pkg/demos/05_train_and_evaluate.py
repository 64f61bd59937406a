"""Train an expectile-regression agent on the 7x7 maze and watch it learn.

Takes a couple of minutes on a laptop CPU.
Run: python demos/05_train_and_evaluate.py
"""
import time

import numpy as np

from deskgcrl.agents import AgentSpec, make_agent
from deskgcrl.datagen import CollectorSpec, collect_dataset
from deskgcrl.envs import make_env
from deskgcrl.evalharness import (EvalConfig, EvalReport, evaluate, finalize)
from deskgcrl.goalsampling import DatasetView

env = make_env("grid7")
print("collecting 40k noisy-expert transitions ...")
dataset = collect_dataset(env, CollectorSpec(variant="navigate",
                                             n_transitions=40_000,
                                             noise_sigma=0.2), seed=1)
view = DatasetView(dataset, env)

spec = AgentSpec(algorithm="gciql", alpha=1.0)
agent = make_agent(spec, env, seed=0)
rng = np.random.default_rng(0)
eval_cfg = EvalConfig(n_rollouts=20)
report = EvalReport(env_id="grid7", variant="navigate", algorithm="gciql", seed=0)

print("training goal-conditioned implicit Q-learning ...")
t0 = time.time()
for step in range(1, 6001):
    vb, pb = agent.sample_batches(view, "navigate", 128, rng)
    metrics = agent.train_step(vb, pb)
    if step % 1500 == 0:
        rates = evaluate(agent, env, eval_cfg, np.random.default_rng([0xE7, step]))
        report.add_epoch(step, rates)
        print(f"step {step:5d}: value_loss {metrics['value_loss']:.3f}  "
              f"success {np.mean(rates):.2f}  per-goal {rates}  "
              f"({time.time() - t0:.0f}s)")

final = finalize(report, EvalConfig(aggregate_last=3))
print(f"\nfinal score (mean of last 3 evaluation epochs): {final:.3f}")

print("\nthe learned value function orders states by distance to goal:")
from deskgcrl.envs.maze import cell_center
goal = cell_center((7, 7))
for cell in ((7, 6), (7, 3), (1, 1)):
    x = np.concatenate([cell_center(cell), goal])[None, :]
    v = 0.5 * (agent._apply("v1", x)[0, 0] + agent._apply("v2", x)[0, 0])
    print(f"  V({cell} -> goal (7,7)) = {v:7.2f}")
