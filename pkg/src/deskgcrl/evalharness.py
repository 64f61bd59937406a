"""Multi-goal evaluation protocol.

Each of the five evaluation tasks gets its own rng stream and ``n_rollouts``
episodes with slightly randomized initial and goal states; an episode ends at
the first success (checked after every transition, including the initial
state before any action) or at the horizon.  An epoch's overall rate is the
unweighted mean of the five per-goal rates, and the final score is the mean
overall rate across the last ``aggregate_last`` epochs.  Success is binary
throughout; there is no partial credit.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgError, InvalidStateError

N_GOALS = 5


@dataclass
class EvalConfig:
    n_rollouts: int = 50
    eval_every: int = 2000
    horizon: int | None = None  # None: use the env's horizon
    aggregate_last: int = 3

    def __post_init__(self):
        if self.n_rollouts < 1:
            raise InvalidArgError("n_rollouts must be >= 1")
        if self.aggregate_last < 1:
            raise InvalidArgError("aggregate_last must be >= 1")


@dataclass
class EvalReport:
    env_id: str = ""
    variant: str = ""
    algorithm: str = ""
    seed: int = 0
    steps: list = field(default_factory=list)       # training step per epoch
    per_goal: list = field(default_factory=list)    # per epoch: 5 rates
    overall: list = field(default_factory=list)     # per epoch: mean of 5

    def add_epoch(self, step, goal_rates):
        rates = [float(r) for r in goal_rates]
        if len(rates) != N_GOALS:
            raise InvalidArgError(f"expected {N_GOALS} goal rates, got {len(rates)}")
        self.steps.append(int(step))
        self.per_goal.append(rates)
        self.overall.append(float(np.mean(rates)))

    @property
    def n_epochs(self):
        return len(self.overall)


def rollout(agent, env, task_index, horizon, rng) -> bool:
    """One evaluation episode; returns binary success."""
    state, goal = env.reset(task_index, True, rng)
    if env.success(state, goal):
        return True
    for _ in range(horizon):
        action = agent.act(state, goal, mode="eval", rng=rng)
        state = env.step(state, np.atleast_1d(action), rng)
        if env.success(state, goal):
            return True
    return False


def evaluate(agent, env, config: EvalConfig, rng) -> list:
    """Per-goal success rates over ``config.n_rollouts`` rollouts each.

    The five goals use independent child streams of ``rng``, and each rollout
    gets its own derived stream, so results are order-independent.
    """
    horizon = config.horizon if config.horizon is not None else env.horizon
    goal_rngs = rng.spawn(N_GOALS)
    rates = []
    for task_index in range(N_GOALS):
        rollout_rngs = goal_rngs[task_index].spawn(config.n_rollouts)
        wins = sum(rollout(agent, env, task_index, horizon, r) for r in rollout_rngs)
        rates.append(wins / config.n_rollouts)
    return rates


def finalize(report: EvalReport, config: EvalConfig) -> float:
    """Mean of the overall rates across the last ``aggregate_last`` epochs."""
    if report.n_epochs < config.aggregate_last:
        raise InvalidStateError(
            f"need >= {config.aggregate_last} epochs, have {report.n_epochs}")
    return float(np.mean(report.overall[-config.aggregate_last:]))


# ------------------------------------------------------------ report files

REPORT_HEADER = "env\tvariant\talgorithm\tseed\tstep\toverall\t" + \
    "\t".join(f"goal{i}" for i in range(N_GOALS))


def append_report(path, report: EvalReport):
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a") as f:
        if new:
            f.write(REPORT_HEADER + "\n")
        for step, overall, goals in zip(report.steps, report.overall, report.per_goal):
            cells = [report.env_id, report.variant, report.algorithm,
                     str(report.seed), str(step), repr(overall)]
            cells += [repr(g) for g in goals]
            f.write("\t".join(cells) + "\n")


def read_reports(paths) -> list:
    """Parse report files back into EvalReports, one per (env, variant, algo,
    seed) group, epochs in file order."""
    groups = {}
    for path in paths:
        with open(path) as f:
            lines = [ln.rstrip("\n") for ln in f if ln.strip()]
        if not lines or lines[0] != REPORT_HEADER:
            raise InvalidArgError(f"{path}: not a report file")
        for ln in lines[1:]:
            cells = ln.split("\t")
            env_id, variant, algo, seed, step = cells[:5]
            key = (env_id, variant, algo, int(seed))
            rep = groups.setdefault(key, EvalReport(
                env_id=env_id, variant=variant, algorithm=algo, seed=int(seed)))
            rep.add_epoch(int(step), [float(c) for c in cells[6:6 + N_GOALS]])
    return list(groups.values())


def emit_table(reports, config: EvalConfig | None = None) -> tuple:
    """Aggregate final scores into (tab-delimited text, aligned text).

    Rows are (env, variant); columns are algorithms; cells are
    mean +/- population std over seeds of the final (last-3-epoch) score.
    """
    if not reports:
        raise InvalidArgError("emit_table needs at least one report")
    config = config or EvalConfig(aggregate_last=min(r.n_epochs for r in reports))
    scores = {}
    for rep in reports:
        key = (rep.env_id, rep.variant)
        scores.setdefault(key, {}).setdefault(rep.algorithm, []).append(
            finalize(rep, config))
    algos = sorted({a for row in scores.values() for a in row})
    rows = []
    header = ["env", "variant"] + algos
    for (env_id, variant) in sorted(scores):
        row = [env_id, variant]
        for algo in algos:
            vals = scores[(env_id, variant)].get(algo)
            if vals is None:
                row.append("")
            else:
                mean = float(np.mean(vals))
                std = float(np.std(vals))  # population (divide by N)
                row.append(f"{mean:.4f}±{std:.4f}")
        rows.append(row)
    tsv = "\n".join(["\t".join(header)] + ["\t".join(r) for r in rows])
    widths = [max(len(str(row[i])) for row in [header] + rows) for i in range(len(header))]
    aligned = "\n".join(
        "  ".join(str(row[i]).ljust(widths[i]) for i in range(len(header)))
        for row in [header] + rows)
    return tsv, aligned


def parse_table(tsv: str) -> dict:
    """Invert emit_table's delimited output: {(env, variant): {algo: (mean, std)}}."""
    lines = [ln for ln in tsv.splitlines() if ln.strip()]
    header = lines[0].split("\t")
    algos = header[2:]
    out = {}
    for ln in lines[1:]:
        cells = ln.split("\t")
        row = {}
        for algo, cell in zip(algos, cells[2:]):
            if cell:
                mean, std = cell.split("±")
                row[algo] = (float(mean), float(std))
        out[(cells[0], cells[1])] = row
    return out
