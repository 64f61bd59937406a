"""Small multi-algorithm benchmark with the paper-style aggregated table.

Trains three algorithms for a short budget (a few minutes total) and renders
the mean +/- std table over two seeds.
Run: python demos/06_benchmark_table.py
"""
import numpy as np

from deskgcrl.agents import AgentSpec, make_agent
from deskgcrl.datagen import CollectorSpec, collect_dataset
from deskgcrl.envs import make_env
from deskgcrl.evalharness import (EvalConfig, EvalReport, emit_table, evaluate)
from deskgcrl.goalsampling import DatasetView

env = make_env("grid7")
dataset = collect_dataset(env, CollectorSpec(variant="navigate",
                                             n_transitions=30_000,
                                             noise_sigma=0.2), seed=5)
view = DatasetView(dataset, env)
eval_cfg = EvalConfig(n_rollouts=15)

ALPHAS = {"gcbc": 1.0, "gcivl": 10.0, "gciql": 1.0}
reports = []
for algo in ("gcbc", "gcivl", "gciql"):
    for seed in (0, 1):
        agent = make_agent(AgentSpec(algorithm=algo, alpha=ALPHAS[algo]), env, seed)
        rng = np.random.default_rng([seed, 7])
        rep = EvalReport(env_id="grid7", variant="navigate",
                         algorithm=algo, seed=seed)
        for step in range(1, 4001):
            vb, pb = agent.sample_batches(view, "navigate", 128, rng)
            agent.train_step(vb, pb)
            if step % 2000 == 0:
                rates = evaluate(agent, env, eval_cfg,
                                 np.random.default_rng([seed, 0xE7, step]))
                rep.add_epoch(step, rates)
        reports.append(rep)
        print(f"{algo} seed {seed}: epochs {[round(v, 2) for v in rep.overall]}")

tsv, aligned = emit_table(reports, EvalConfig(aggregate_last=2))
print("\n" + aligned)
