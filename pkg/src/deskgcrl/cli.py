"""Command-line entry point: dataset generation, training, evaluation,
table rendering, and the action-noise ablation sweep.

Runs are fully specified by a flat key-value config (one ``key = value`` per
line, ``#`` comments, duplicate keys last-one-wins with a warning) plus
command-line ``--set key=value`` overrides; the effective config is echoed
into the run directory so any run can be reproduced bit-exactly from it.

Exit codes: 0 success, 2 config error, 3 runtime/numeric error, 4 missing
artifact.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import evalharness
from .agents import AgentSpec, make_agent
from .datagen import CollectorSpec, collect_dataset, read_dataset, write_dataset
from .envs import make_env
from .errors import (ConfigError, DeskGcrlError, InvalidArgError,
                     MissingArtifactError, NumericError)
from .evalharness import EvalConfig, EvalReport, append_report, emit_table
from .goalsampling import DatasetView

COMMANDS = ("gen-data", "train", "eval", "table", "ablate-noise")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_MISSING = 4


@dataclass
class RunConfig:
    env: str = "grid7"
    variant: str = "navigate"
    algorithm: str = "gciql"
    seed: int = 0
    # data generation
    n_transitions: int = 100_000
    noise_sigma: float = 0.2
    segment_cap: float = 4.0
    redirect_period: int = 10
    # training (reference defaults; desk-scale values are much smaller)
    steps: int = 30_000
    batch_size: int = 128
    lr: float = 3e-4
    gamma: float = 0.99
    kappa: float = 0.9
    tau: float = 0.005
    alpha: float = 3.0
    extraction: str = "auto"
    hidden: str = "64,64"
    hiql_k: int = 10
    qrl_epsilon: float = 0.05
    # evaluation
    eval_every: int = 10_000
    n_rollouts: int = 50
    aggregate_last: int = 3
    horizon: int = 0               # 0: env default
    # sweeps
    sigmas: str = "0,0.1,0.2,0.4"
    log_every: int = 500
    # paths
    data_dir: str = "data"
    run_dir: str = "runs"

    def hidden_dims(self):
        try:
            return tuple(int(v) for v in str(self.hidden).split(",") if v != "")
        except ValueError:
            raise ConfigError(f"bad hidden dims {self.hidden!r}") from None

    def sigma_list(self):
        try:
            return [float(v) for v in str(self.sigmas).split(",") if v != ""]
        except ValueError:
            raise ConfigError(f"bad sigma list {self.sigmas!r}") from None


_FIELDS = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}; valid keys: "
                          + ", ".join(sorted(_FIELDS)))
    kind = _FIELDS[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for key {key!r}") from None


def parse_config(path=None, overrides=(), warn=print) -> RunConfig:
    """File values override defaults; CLI overrides win over file values."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise MissingArtifactError(f"config file {path} not found")
        seen = set()
        for lineno, line in enumerate(p.read_text().splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in stripped.split("=", 1))
            if key in seen:
                warn(f"warning: duplicate key {key!r} in {path}; last value wins")
            seen.add(key)
            values[key] = _coerce(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, raw = (s.strip() for s in item.split("=", 1))
        values[key] = _coerce(key, raw)
    return replace(RunConfig(), **values)


def echo_config(config: RunConfig, path):
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(RunConfig)]
    Path(path).write_text("\n".join(lines) + "\n")


def dataset_path(config: RunConfig, sigma=None, validation=False):
    sigma = config.noise_sigma if sigma is None else sigma
    tag = f"{config.env}-{config.variant}-s{config.seed}-sig{sigma:g}"
    suffix = "-val.ds" if validation else ".ds"
    return Path(config.data_dir) / (tag + suffix)


def run_directory(config: RunConfig):
    return (Path(config.run_dir) / config.env / config.variant
            / config.algorithm / str(config.seed))


def _agent_spec(config: RunConfig) -> AgentSpec:
    return AgentSpec(
        algorithm=config.algorithm, gamma=config.gamma, kappa=config.kappa,
        extraction=config.extraction, alpha=config.alpha, tau=config.tau,
        lr=config.lr, hidden_dims=config.hidden_dims(),
        hiql_k=config.hiql_k, qrl_epsilon=config.qrl_epsilon,
    )


def _eval_config(config: RunConfig) -> EvalConfig:
    return EvalConfig(n_rollouts=config.n_rollouts, eval_every=config.eval_every,
                      horizon=config.horizon or None,
                      aggregate_last=config.aggregate_last)


def cmd_gen_data(config: RunConfig):
    env = make_env(config.env)
    spec = CollectorSpec(variant=config.variant, n_transitions=config.n_transitions,
                         noise_sigma=config.noise_sigma,
                         segment_cap=config.segment_cap,
                         redirect_period=config.redirect_period)
    Path(config.data_dir).mkdir(parents=True, exist_ok=True)
    main_path = dataset_path(config)
    write_dataset(collect_dataset(env, spec, config.seed), main_path)
    # companion validation split from the next seed
    val = collect_dataset(env, spec, config.seed + 1)
    write_dataset(val, dataset_path(config, validation=True))
    print(f"wrote {main_path} (+ validation)")
    return EXIT_OK


def train_agent(config: RunConfig, dataset, out_dir: Path, eval_during=True):
    """Training loop shared by the train command and the noise ablation."""
    env = make_env(config.env)
    agent = make_agent(_agent_spec(config), env, config.seed)
    view = DatasetView(dataset, env)
    rng = np.random.default_rng([config.seed, 0xD5C])
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.tsv"
    report = EvalReport(env_id=config.env, variant=config.variant,
                        algorithm=config.algorithm, seed=config.seed)
    eval_cfg = _eval_config(config)
    with open(metrics_path, "w") as mf:
        for step in range(1, config.steps + 1):
            vb, pb = agent.sample_batches(view, dataset.variant, config.batch_size, rng)
            metrics = agent.train_step(vb, pb)
            if step % config.log_every == 0 or step == 1:
                for name in sorted(metrics):
                    mf.write(f"{step}\t{name}\t{metrics[name]!r}\n")
            if eval_during and step % config.eval_every == 0:
                erng = np.random.default_rng([config.seed, 0xE7A1, step])
                rates = evalharness.evaluate(agent, env, eval_cfg, erng)
                report.add_epoch(step, rates)
                mf.write(f"{step}\toverall_success\t{report.overall[-1]!r}\n")
                mf.flush()
    agent.save(out_dir / "checkpoint.bin")
    if report.n_epochs:
        append_report(out_dir / "reports.tsv", report)
    return agent, report


def cmd_train(config: RunConfig):
    path = dataset_path(config)
    if not path.exists():
        raise MissingArtifactError(f"dataset {path} not found; run gen-data first")
    dataset = read_dataset(path)
    out_dir = run_directory(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo_config(config, out_dir / "config.txt")
    _, report = train_agent(config, dataset, out_dir)
    if report.n_epochs >= config.aggregate_last:
        final = evalharness.finalize(report, _eval_config(config))
        print(f"final success (last {config.aggregate_last} epochs): {final:.4f}")
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def cmd_eval(config: RunConfig):
    out_dir = run_directory(config)
    ckpt = out_dir / "checkpoint.bin"
    if not ckpt.exists():
        raise MissingArtifactError(f"checkpoint {ckpt} not found; train first")
    env = make_env(config.env)
    agent = make_agent(_agent_spec(config), env, config.seed)
    agent.load(ckpt)
    rng = np.random.default_rng([config.seed, 0xE7A1, 0])
    rates = evalharness.evaluate(agent, env, _eval_config(config), rng)
    report = EvalReport(env_id=config.env, variant=config.variant,
                        algorithm=config.algorithm, seed=config.seed)
    report.add_epoch(config.steps, rates)
    append_report(out_dir / "reports.tsv", report)
    print(f"per-goal: {rates}  overall: {np.mean(rates):.4f}")
    return EXIT_OK


def cmd_table(config: RunConfig):
    paths = sorted(Path(config.run_dir).glob("**/reports.tsv"))
    if not paths:
        raise MissingArtifactError(f"no reports under {config.run_dir}")
    reports = evalharness.read_reports(paths)
    agg = min(config.aggregate_last, min(r.n_epochs for r in reports))
    tsv, aligned = emit_table(reports, EvalConfig(aggregate_last=agg))
    out = Path(config.run_dir) / "table.tsv"
    out.write_text(tsv + "\n")
    print(aligned)
    print(f"\nwrote {out}")
    return EXIT_OK


def cmd_ablate_noise(config: RunConfig):
    """Re-collect the dataset at each noise level, retrain, and record the
    (sigma, final success) curve."""
    env = make_env(config.env)
    rows = []
    base = Path(config.run_dir) / "noise_ablation" / config.env / config.algorithm
    for sigma in config.sigma_list():
        cfg = replace(config, noise_sigma=sigma)
        spec = CollectorSpec(variant=cfg.variant, n_transitions=cfg.n_transitions,
                             noise_sigma=sigma, segment_cap=cfg.segment_cap,
                             redirect_period=cfg.redirect_period)
        dataset = collect_dataset(env, spec, cfg.seed)
        out_dir = base / f"sig{sigma:g}" / str(cfg.seed)
        _, report = train_agent(cfg, dataset, out_dir)
        final = evalharness.finalize(report, _eval_config(cfg))
        rows.append((sigma, final))
        print(f"sigma={sigma:g}  final={final:.4f}")
    base.mkdir(parents=True, exist_ok=True)
    out = base / f"sweep-s{config.seed}.tsv"
    with open(out, "w") as f:
        f.write("sigma\tfinal_success\n")
        for sigma, final in rows:
            f.write(f"{sigma:g}\t{final!r}\n")
    print(f"wrote {out}")
    return EXIT_OK


def run(command: str, config: RunConfig) -> int:
    handlers = {
        "gen-data": cmd_gen_data,
        "train": cmd_train,
        "eval": cmd_eval,
        "table": cmd_table,
        "ablate-noise": cmd_ablate_noise,
    }
    if command not in handlers:
        raise ConfigError(f"unknown command {command!r}; have {COMMANDS}")
    return handlers[command](config)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="deskgcrl",
        description="offline goal-conditioned RL at desk scale")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    args = parser.parse_args(argv)
    try:
        config = parse_config(args.config, args.overrides)
        return run(args.command, config)
    except MissingArtifactError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISSING
    except (ConfigError, InvalidArgError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DeskGcrlError, ArithmeticError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
