"""
Command-line interface.

Commands::

    lyacert train   [--config FILE] [--seeds A..B] [--<key> VALUE ...]
    lyacert eval    CHECKPOINT [--episodes N] [--seed S] [--out DIR]
    lyacert certify CHECKPOINT [--episodes N] [--batch-size N] [--posthoc-steps N] ...
    lyacert levels  CHECKPOINT [--n-theta N] [--n-theta-dot N] ... [--out FILE]
    lyacert ref-gen [--actions FILE] [--steps N] [--out FILE]

Any ``--<key> VALUE`` pair after ``train`` overrides the RunConfig field of
that name. Exit codes: 0 success, 2 configuration or checkpoint error,
3 numerical abort (the partial report is still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from lyacert import __version__
from lyacert.algorithms import (
    build_env,
    config_from_checkpoint,
    lyapunov_from_checkpoint,
    policy_from_checkpoint,
    trainers,
)
from lyacert.algorithms.common import save_checkpoint
from lyacert.cert import (
    certify,
    collect_transitions,
    evaluate_policy,
    fit_posthoc_lyapunov,
    level_set_grid,
    rollout_trajectory,
    violation_scan,
    write_levels_csv,
)
from lyacert.config.settings import Settings
from lyacert.core.errors import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    NumericalAbort,
    ReferenceGenerationError,
)
from lyacert.core.identity import new_run_id, run_name
from lyacert.envs.quadrotor import (
    QuadrotorParams,
    default_reference_actions,
    generate_reference,
    read_actions_csv,
)
from lyacert.models.reports import CertificationThresholds, GridSpec, RunReport, SeedCurve
from lyacert.models.run_config import RunConfig, load_run_config, parse_override
from lyacert.nn.checkpoint import Checkpoint
from lyacert.utils.csvio import write_csv
from lyacert.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
SUMMARY_HEADER = ["seed", "final_return", "episodes"]


def parse_overrides(tokens: Sequence[str]) -> Dict[str, Any]:
    """
    Turn ``--key value`` tokens into a dict of config overrides.

    Raises:
        ConfigError: On a dangling key or a token that is not a ``--key``
    """
    overrides: Dict[str, Any] = {}
    it = iter(tokens)
    for token in it:
        if not token.startswith("--") or len(token) <= 2:
            raise ConfigError(f"Expected --key value, got '{token}'")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ConfigError(f"Missing value for --{key}") from None
        overrides[key.replace("-", "_")] = parse_override(value)
    return overrides


def parse_seed_range(text: str) -> List[int]:
    """``"0..9"`` → [0, 1, ..., 9]; a single integer is a one-seed range."""
    try:
        if ".." in text:
            low, high = (int(p) for p in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError as e:
        raise ConfigError(f"Invalid seed range '{text}'") from e
    if high < low:
        raise ConfigError(f"Empty seed range '{text}'")
    return list(range(low, high + 1))


def _write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def run_training(config: RunConfig, out_dir: Path) -> Tuple[int, Optional[RunReport]]:
    """
    Train one configuration and write its artifacts into out_dir.

    Returns:
        (exit code, finished report or None after a numerical abort)
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "config.resolved.json", config.resolved())
    metrics = MetricsCollector()
    env = build_env(config)
    trainer = trainers.create(
        config.algo,
        env,
        config,
        metrics=metrics,
        on_checkpoint=lambda step, ckpt: save_checkpoint(out_dir, step, ckpt),
    )
    try:
        with metrics.timer("run"):
            report = trainer.run()
    except NumericalAbort as e:
        if e.report is not None:
            e.report.to_csv(out_dir / "report.csv")
        _write_json(out_dir / "metrics.json", {"run_id": config.run_id, **metrics.summary()})
        logger.error(
            f"Run {config.run_id} aborted at step {e.step}; partial report kept in {out_dir}"
        )
        return EXIT_NUMERICAL, None
    report.to_csv(out_dir / "report.csv")
    report.to_curve_csv(out_dir / "curve.csv")
    trainer.checkpoint().save(out_dir / "checkpoint_final.json")
    _write_json(out_dir / "metrics.json", {"run_id": config.run_id, **metrics.summary()})
    logger.info(f"Artifacts written to {out_dir}")
    return EXIT_OK, report


def cmd_train(args: argparse.Namespace, extra: Sequence[str], runtime: Settings) -> int:
    overrides = parse_overrides(extra)
    seeds = parse_seed_range(args.seeds) if args.seeds else None
    if seeds is not None:
        overrides.pop("seed", None)
    config = load_run_config(args.config, overrides)
    if config.checkpoint_interval is None:
        config = config.model_copy(update={"checkpoint_interval": runtime.CHECKPOINT_INTERVAL})

    if seeds is None:
        run_id = config.run_id or new_run_id()
        config = config.model_copy(update={"run_id": run_id})
        out_dir = Path(config.output_dir) if config.output_dir else runtime.output_dir_for(
            run_name(config.algo, config.env, config.seed, run_id)
        )
        code, _ = run_training(config, out_dir)
        return code

    sweep_id = new_run_id()
    root = Path(config.output_dir) if config.output_dir else runtime.output_dir_for(
        f"{config.algo}-{config.env}-sweep-{sweep_id}"
    )
    rows = []
    reports = []
    worst = EXIT_OK
    for seed in seeds:
        seeded = config.model_copy(update={"seed": seed, "run_id": new_run_id()})
        out_dir = root / f"seed{seed}"
        seeded = seeded.model_copy(update={"output_dir": str(out_dir)})
        code, report = run_training(seeded, out_dir)
        worst = max(worst, code)
        if report is None:
            rows.append([seed, None, 0])
            continue
        reports.append(report)
        rows.append([seed, report.final_return(), len(report.episode_rows)])
    write_csv(root / "summary.csv", SUMMARY_HEADER, rows)
    # aborted seeds are left out of the aggregate curve
    SeedCurve.from_reports(reports).to_csv(root / "curves.csv")
    logger.info(f"Sweep over seeds {seeds[0]}..{seeds[-1]} written to {root}")
    return worst


def cmd_eval(args: argparse.Namespace, runtime: Settings) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    config = config_from_checkpoint(ckpt)
    policy = policy_from_checkpoint(ckpt)
    env = build_env(config)
    summary = evaluate_policy(env, policy, args.episodes, np.random.default_rng(args.seed))
    out_dir = Path(args.out) if args.out else Path(args.checkpoint).parent / "eval"
    _write_json(out_dir / "summary.json", summary.model_dump(mode="json"))
    if summary.error is None:
        # same seed as the first evaluation episode
        traj = rollout_trajectory(env, policy, np.random.default_rng(args.seed))
        traj.to_csv(out_dir / "trajectory.csv")
    logger.info(f"Evaluation written to {out_dir}")
    return EXIT_OK


def cmd_certify(args: argparse.Namespace, runtime: Settings) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    config = config_from_checkpoint(ckpt)
    policy = policy_from_checkpoint(ckpt)
    env = build_env(config)
    batch_rng, scan_rng, fit_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(args.seed).spawn(3)
    )
    if "lyapunov" in ckpt.nets:
        lyap = lyapunov_from_checkpoint(ckpt)
    elif args.posthoc_steps > 0:
        lyap, _ = fit_posthoc_lyapunov(
            env,
            policy,
            args.posthoc_steps,
            fit_rng,
            hidden=config.lyapunov_hidden or config.hidden or [64, 64],
            mu=config.mu,
            learning_rate=config.lr_lyapunov,
            batch_size=config.lyapunov_batch_size,
        )
    else:
        raise CheckpointError("no Lyapunov function in checkpoint")

    thresholds = CertificationThresholds(
        risk=args.risk_threshold,
        violation_fraction=args.violation_threshold,
        radius=args.radius,
    )
    fresh = collect_transitions(env, policy, args.batch_size, batch_rng)
    scan = violation_scan(env, policy, lyap, args.episodes, scan_rng)
    verdict = certify(env, policy, lyap, fresh, thresholds, scan=scan)
    out_dir = Path(args.out) if args.out else Path(args.checkpoint).parent / "certify"
    _write_json(
        out_dir / "verdict.json",
        {"verdict": verdict.model_dump(mode="json"), "violations": scan.model_dump(mode="json")},
    )
    scan.to_csv(out_dir / "violations.csv")
    logger.info(f"Certificate written to {out_dir}")
    return EXIT_OK


def cmd_levels(args: argparse.Namespace, runtime: Settings) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    config = config_from_checkpoint(ckpt)
    if config.env != "pendulum":
        raise ConfigError(f"Level sets are defined for the pendulum only, not '{config.env}'")
    policy = policy_from_checkpoint(ckpt)
    lyap = lyapunov_from_checkpoint(ckpt)
    grid = GridSpec(
        theta_low=args.theta_low,
        theta_high=args.theta_high,
        n_theta=args.n_theta,
        theta_dot_low=args.theta_dot_low,
        theta_dot_high=args.theta_dot_high,
        n_theta_dot=args.n_theta_dot,
    )
    values = level_set_grid(lyap, policy, grid, args.samples, np.random.default_rng(args.seed))
    out = Path(args.out) if args.out else Path(args.checkpoint).parent / "levels.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = write_levels_csv(out, grid, values)
    logger.info(f"Wrote {rows} level-set rows to {out}")
    return EXIT_OK


def cmd_ref_gen(args: argparse.Namespace, runtime: Settings) -> int:
    params = QuadrotorParams()
    if args.actions:
        try:
            actions = read_actions_csv(args.actions)
        except (OSError, ValueError) as e:
            raise ConfigError(f"Cannot read actions {args.actions}: {e}") from e
    else:
        actions = default_reference_actions(params, args.steps)
    reference = generate_reference(actions, params)
    out = Path(args.out) if args.out else runtime.OUTPUT_ROOT / "reference.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = reference.to_csv(out)
    logger.info(f"Wrote reference with {rows} states to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyacert",
        allow_abbrev=False,
        description="Train, evaluate and certify Lyapunov-guided SAC/PPO policies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser(
        "train",
        allow_abbrev=False,
        help="Train a policy; extra --key value pairs override the config",
    )
    train.add_argument("--config", help="JSON config file")
    train.add_argument(
        "--seeds", help="Seed range A..B; writes summary.csv and the curves.csv aggregate"
    )

    ev = sub.add_parser("eval", help="Evaluate a checkpoint with deterministic actions")
    ev.add_argument("checkpoint")
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out")

    cert = sub.add_parser("certify", help="Certify a checkpoint's Lyapunov function")
    cert.add_argument("checkpoint")
    cert.add_argument("--episodes", type=int, default=50)
    cert.add_argument("--batch-size", type=int, default=10_000)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--risk-threshold", type=float, default=1e-3)
    cert.add_argument("--violation-threshold", type=float, default=0.05)
    cert.add_argument("--radius", type=float, default=0.5)
    cert.add_argument("--posthoc-steps", type=int, default=0,
                      help="Fit a Lyapunov function first when the checkpoint has none")
    cert.add_argument("--out")

    lv = sub.add_parser("levels", help="Export pendulum level sets of the Lyapunov function")
    lv.add_argument("checkpoint")
    lv.add_argument("--n-theta", type=int, default=101)
    lv.add_argument("--n-theta-dot", type=int, default=101)
    lv.add_argument("--theta-low", type=float, default=-np.pi)
    lv.add_argument("--theta-high", type=float, default=np.pi)
    lv.add_argument("--theta-dot-low", type=float, default=-8.0)
    lv.add_argument("--theta-dot-high", type=float, default=8.0)
    lv.add_argument("--samples", type=int, default=16)
    lv.add_argument("--seed", type=int, default=0)
    lv.add_argument("--out")

    ref = sub.add_parser("ref-gen", help="Generate a quadrotor reference trajectory")
    ref.add_argument("--actions", help="Action CSV with columns Fz,wx,wy,wz")
    ref.add_argument("--steps", type=int, default=None)
    ref.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    runtime = Settings()
    logging.basicConfig(
        level=runtime.effective_log_level(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != "train":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    handlers = {
        "eval": cmd_eval,
        "certify": cmd_certify,
        "levels": cmd_levels,
        "ref-gen": cmd_ref_gen,
    }
    try:
        if args.command == "train":
            return cmd_train(args, extra, runtime)
        return handlers[args.command](args, runtime)
    except (ConfigError, CheckpointError, ContractViolation, ValidationError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, ReferenceGenerationError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
