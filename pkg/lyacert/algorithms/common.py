"""
Pieces shared by the SAC-family and PPO-family trainers: RNG streams,
Lyapunov settings, environment construction and checkpoint plumbing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union

import numpy as np

from lyacert.config import settings
from lyacert.core.errors import CheckpointError, ConfigError, ContractViolation, NumericalAbort
from lyacert.envs import environments
from lyacert.envs.base import Environment, EnvSpec
from lyacert.envs.quadrotor import QuadrotorParams, ReferenceTrajectory
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.models.reports import RunReport
from lyacert.models.run_config import RunConfig
from lyacert.nn.adam import AdamState, adam_step
from lyacert.nn.checkpoint import Checkpoint
from lyacert.nn.dense import DenseNet
from lyacert.nn.loss import LossResult
from lyacert.nn.policy import SquashedGaussianPolicy
from lyacert.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, None]
CheckpointCallback = Callable[[int, Checkpoint], None]


@dataclass
class LyapunovConfig:
    """
    Lyapunov penalty and fit settings.

    Attributes:
        beta: Lyapunov temperature, weight of the decrease penalty (>= 0)
        mu: Minimum decrease rate
        steps: Lyapunov gradient steps per env step (off-policy) or per rollout
        batch_size: Lyapunov minibatch size
    """

    beta: float = 1.0
    mu: float = 0.01
    steps: int = 1
    batch_size: int = 256

    def __post_init__(self) -> None:
        if self.beta < 0.0 or self.mu < 0.0:
            raise ContractViolation(f"beta and mu must be >= 0, got {self.beta}, {self.mu}")
        if self.steps < 0 or self.batch_size <= 0:
            raise ContractViolation("Lyapunov steps must be >= 0 and batch size positive")

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "LyapunovConfig":
        return cls(
            beta=config.effective_beta,
            mu=config.mu,
            steps=int(config.lyapunov_steps or 0),
            batch_size=config.lyapunov_batch_size,
        )


@dataclass
class RngStreams:
    """
    Independent generators spawned from one root seed.

    Each concern draws from its own stream, so enabling the Lyapunov fit
    never shifts the random numbers seen by environment stepping, action
    sampling or minibatch selection.
    """

    init: np.random.Generator
    env: np.random.Generator
    noise: np.random.Generator
    update: np.random.Generator
    lyapunov: np.random.Generator
    evaluation: np.random.Generator

    @classmethod
    def from_seed(cls, seed: SeedLike) -> "RngStreams":
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        init, env, noise, update, lyap, evaluation = (
            np.random.default_rng(s) for s in root.spawn(6)
        )
        return cls(init, env, noise, update, lyap, evaluation)


def build_env(config: RunConfig) -> Environment:
    """Instantiate the configured environment."""
    if config.env == "quadrotor":
        params = QuadrotorParams(episode_length=int(config.episode_length or 500))
        if config.reward_weights is not None:
            pw, vw, aw, rw = config.reward_weights
            params = QuadrotorParams(
                episode_length=params.episode_length,
                position_weight=pw,
                velocity_weight=vw,
                attitude_weight=aw,
                rate_weight=rw,
            )
        reference = None
        if config.reference_path:
            try:
                reference = ReferenceTrajectory.from_csv(config.reference_path)
            except (OSError, ValueError) as e:
                raise ConfigError(f"Cannot load reference {config.reference_path}: {e}") from e
        return environments.create("quadrotor", params=params, reference=reference)
    return environments.create(config.env, episode_length=config.episode_length)


def build_lyapunov(
    config: RunConfig, spec: EnvSpec, rng: np.random.Generator
) -> Optional[LyapunovFunction]:
    """Fresh Lyapunov candidate for the run, or None when the algorithm has none."""
    if not config.uses_lyapunov:
        return None
    action_dim = 0 if config.state_only_lyapunov else spec.action_dim
    return LyapunovFunction.initialize(
        spec.state_dim,
        action_dim,
        config.lyapunov_hidden or [64, 64],
        rng,
        mu=config.mu,
        dt=spec.dt,
        goal=spec.goal,
        activation=config.activation,
    )


def apply_gradients(
    nets: Dict[str, DenseNet], optimizers: Dict[str, AdamState], loss: LossResult
) -> None:
    """
    One Adam step for every network the loss has gradients for.

    Raises:
        NumericalAbort: If the loss or any gradient is not finite
    """
    if not loss.is_finite():
        raise NumericalAbort(f"Non-finite loss {loss.value} for {sorted(loss.grads)}")
    for name, grads in loss.grads.items():
        adam_step(nets[name], grads, optimizers[name])


def policy_meta(policy: SquashedGaussianPolicy) -> Dict[str, Any]:
    return {
        "action_scale": policy.action_scale.tolist(),
        "action_bias": policy.action_bias.tolist(),
        "log_std_bounds": list(policy.log_std_bounds),
    }


def policy_from_checkpoint(ckpt: Checkpoint) -> SquashedGaussianPolicy:
    """
    Rebuild the policy stored in a checkpoint.

    Raises:
        CheckpointError: If the policy network or its metadata is missing
    """
    trunk = ckpt.require("policy", "no policy in checkpoint")
    meta = ckpt.meta.get("policy")
    if not isinstance(meta, dict):
        raise CheckpointError("checkpoint lacks policy metadata")
    try:
        return SquashedGaussianPolicy(
            trunk, meta["action_scale"], meta["action_bias"], tuple(meta["log_std_bounds"])
        )
    except (KeyError, ContractViolation) as e:
        raise CheckpointError(f"Invalid policy metadata: {e}") from e


def lyapunov_from_checkpoint(ckpt: Checkpoint) -> LyapunovFunction:
    """
    Rebuild the Lyapunov function stored in a checkpoint.

    Raises:
        CheckpointError: If the checkpoint has no Lyapunov function
    """
    net = ckpt.require("lyapunov", "no Lyapunov function in checkpoint")
    meta = ckpt.meta.get("lyapunov")
    if not isinstance(meta, dict):
        raise CheckpointError("no Lyapunov function in checkpoint")
    try:
        return LyapunovFunction.from_meta(net, meta)
    except (KeyError, ContractViolation) as e:
        raise CheckpointError(f"Invalid Lyapunov metadata: {e}") from e


def config_from_checkpoint(ckpt: Checkpoint) -> RunConfig:
    """The RunConfig a checkpoint was trained with."""
    data = ckpt.meta.get("config")
    if not isinstance(data, dict):
        raise CheckpointError("checkpoint lacks its run configuration")
    try:
        return RunConfig.model_validate(data)
    except ValueError as e:
        raise CheckpointError(f"Invalid configuration in checkpoint: {e}") from e


class Trainer:
    """
    Base for the training loops.

    Subclasses build their agent in ``__init__`` and implement `_train`
    and `checkpoint`. `run` wraps `_train` so that a numerical abort
    carries the partial report.

    Args:
        env: Environment to train on
        config: Resolved run configuration
        rng: Root seed or SeedSequence; defaults to ``config.seed``
        metrics: Optional collector for counters and timers
        on_checkpoint: Called with (step, checkpoint) every checkpoint interval
    """

    def __init__(
        self,
        env: Environment,
        config: RunConfig,
        rng: SeedLike = None,
        metrics: Optional[MetricsCollector] = None,
        on_checkpoint: Optional[CheckpointCallback] = None,
    ) -> None:
        self.env = env
        self.config = config
        self.streams = RngStreams.from_seed(config.seed if rng is None else rng)
        self.metrics = metrics or MetricsCollector()
        self.on_checkpoint = on_checkpoint
        self.lyapunov_config = LyapunovConfig.from_run_config(config)
        self.report = RunReport(algo=config.algo, env=config.env, seed=config.seed)
        self.steps = 0
        interval = config.checkpoint_interval
        self.checkpoint_interval = settings.CHECKPOINT_INTERVAL if interval is None else interval
        self.lyapunov: Optional[LyapunovFunction] = build_lyapunov(
            config, env.spec, self.streams.lyapunov
        )
        self.lyapunov_optimizer: Optional[AdamState] = (
            AdamState.for_net(self.lyapunov.net, config.lr_lyapunov) if self.lyapunov else None
        )

    def run(self) -> RunReport:
        logger.info(
            f"Training {self.config.algo} on {self.config.env} for {self.config.steps} steps "
            f"(seed {self.config.seed})"
        )
        try:
            self._train()
        except NumericalAbort as e:
            logger.error(f"Numerical abort at step {self.steps}: {e}")
            raise NumericalAbort(str(e), report=self.report, step=self.steps) from e
        logger.info(
            f"Finished {self.config.algo}: {self.steps} steps, "
            f"{len(self.report.episode_rows)} episodes, final return {self.report.final_return()}"
        )
        return self.report

    def _train(self) -> None:
        raise NotImplementedError

    def checkpoint(self) -> Checkpoint:
        raise NotImplementedError

    def _base_meta(self, policy: SquashedGaussianPolicy) -> Dict[str, Any]:
        meta: Dict[str, Any] = {
            "algo": self.config.algo,
            "env": self.config.env,
            "seed": self.config.seed,
            "step": self.steps,
            "policy": policy_meta(policy),
            "config": self.config.resolved(),
        }
        if self.lyapunov is not None:
            meta["lyapunov"] = self.lyapunov.to_meta()
        return meta

    def _maybe_checkpoint(self, previous_steps: int) -> None:
        interval = self.checkpoint_interval
        if not interval or self.on_checkpoint is None:
            return
        if self.steps // interval > previous_steps // interval:
            self.on_checkpoint(self.steps, self.checkpoint())

    def _lyapunov_step(self, loss: LossResult) -> None:
        assert self.lyapunov is not None and self.lyapunov_optimizer is not None
        apply_gradients(
            {"lyapunov": self.lyapunov.net}, {"lyapunov": self.lyapunov_optimizer}, loss
        )
        self.metrics.increment("updates", tags={"phase": "lyapunov"})


def save_checkpoint(directory: Union[str, Path], step: int, ckpt: Checkpoint) -> Path:
    """Write ``checkpoint_<step>.json`` into a run directory."""
    return ckpt.save(Path(directory) / f"checkpoint_{step}.json")
