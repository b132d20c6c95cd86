"""
Experiment configuration.

A `RunConfig` is a flat pydantic model: unknown keys are rejected, every
field has a default, and env-specific defaults (network widths, episode
length, rollout size) are filled in by a validator so the resolved config
echoed into ``config.resolved.json`` is complete. Defaults are tuned values,
not prescribed ones.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from lyacert.core.errors import ConfigError

logger = logging.getLogger(__name__)

Algo = Literal["sac", "lsac", "ppo", "lppo", "lppo-onpolicy-risk"]
EnvName = Literal["pendulum", "quadrotor"]

OFF_POLICY_ALGOS = ("sac", "lsac")
LYAPUNOV_ALGOS = ("lsac", "lppo", "lppo-onpolicy-risk")

_ENV_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "pendulum": {"hidden": [64, 64], "episode_length": 200},
    "quadrotor": {"hidden": [256, 256], "episode_length": 500},
}


class RunConfig(BaseModel):
    """
    Hyperparameters and bookkeeping of one training run.

    Attributes:
        algo: sac, lsac, ppo, lppo or lppo-onpolicy-risk
        env: pendulum or quadrotor
        seed: Root seed of every RNG stream
        steps: Total environment steps K
        gamma, tau, alpha: Discount, polyak rate, entropy temperature
        target_entropy: Entropy diagnostic threshold, default −action_dim
        beta, mu: Lyapunov temperature and minimum decrease rate
        clip_epsilon, gae_lambda: PPO clip range and GAE λ
        rollout_steps, epochs, minibatch_size: PPO collection and update sizes
        batch_size: SAC minibatch size
        lyapunov_steps: Lyapunov gradient steps per env step (LSAC) or per
            rollout (LPPO); 0 disables the fit
        lyapunov_batch_size: Minibatch size of the Lyapunov fit
        warmup_steps: Uniform-random env steps before SAC updates start
        twin_q: Use two Q heads and their minimum in targets
        log_interval: Env steps between update rows (off-policy)
        checkpoint_interval: Env steps between checkpoints, default from Settings
        run_id: Provenance only; training ignores it
    """

    model_config = {"extra": "forbid"}

    algo: Algo = "lsac"
    env: EnvName = "pendulum"
    seed: int = 0
    steps: int = Field(default=100_000, ge=0)

    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    tau: float = Field(default=0.005, gt=0.0, le=1.0)
    alpha: float = Field(default=0.2, ge=0.0)
    target_entropy: Optional[float] = None
    twin_q: bool = False
    batch_size: int = Field(default=256, gt=0)
    warmup_steps: int = Field(default=1000, ge=0)
    replay_capacity: int = Field(default=1_000_000, gt=0)

    beta: float = Field(default=1.0, ge=0.0)
    mu: float = Field(default=0.01, ge=0.0)
    lyapunov_steps: Optional[int] = Field(default=None, ge=0)
    lyapunov_batch_size: int = Field(default=256, gt=0)

    clip_epsilon: float = Field(default=0.2, gt=0.0, lt=1.0)
    gae_lambda: float = Field(default=0.95, ge=0.0, le=1.0)
    rollout_steps: int = Field(default=2048, gt=0)
    epochs: int = Field(default=10, gt=0)
    minibatch_size: int = Field(default=64, gt=0)
    normalize_advantages: bool = True

    lr_policy: float = Field(default=3e-4, gt=0.0)
    lr_q: float = Field(default=3e-4, gt=0.0)
    lr_value: float = Field(default=3e-4, gt=0.0)
    lr_lyapunov: float = Field(default=3e-4, gt=0.0)
    hidden: Optional[List[int]] = None
    lyapunov_hidden: Optional[List[int]] = None
    activation: Literal["tanh", "relu"] = "tanh"

    episode_length: Optional[int] = Field(default=None, gt=0)
    reference_path: Optional[str] = None
    reward_weights: Optional[List[float]] = None

    log_interval: int = Field(default=1000, gt=0)
    checkpoint_interval: Optional[int] = Field(default=None, ge=0)
    output_dir: Optional[str] = None
    run_id: Optional[str] = None

    @field_validator("hidden", "lyapunov_hidden", mode="before")
    @classmethod
    def parse_widths(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [int(p) for p in v.split(",") if p.strip()]
        # a single CLI width such as `--hidden 8` decodes to a bare int
        if isinstance(v, int) and not isinstance(v, bool):
            return [v]
        return v

    @field_validator("hidden", "lyapunov_hidden")
    @classmethod
    def check_widths(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or any(w <= 0 for w in v)):
            raise ValueError(f"Hidden widths must be a non-empty list of positive ints, got {v}")
        return v

    @field_validator("reward_weights", mode="before")
    @classmethod
    def parse_weights(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [float(p) for p in v.split(",") if p.strip()]
        return v

    @field_validator("reward_weights")
    @classmethod
    def check_weights(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and (len(v) != 4 or any(w < 0.0 for w in v)):
            raise ValueError(
                "reward_weights needs 4 non-negative values (position, velocity, attitude, rate)"
            )
        return v

    @model_validator(mode="after")
    def resolve_defaults(self) -> "RunConfig":
        defaults = _ENV_DEFAULTS[self.env]
        if self.hidden is None:
            self.hidden = list(defaults["hidden"])
        if self.lyapunov_hidden is None:
            self.lyapunov_hidden = list(self.hidden)
        if self.episode_length is None:
            self.episode_length = int(defaults["episode_length"])
        if self.lyapunov_steps is None:
            if not self.uses_lyapunov:
                self.lyapunov_steps = 0
            elif self.off_policy:
                self.lyapunov_steps = 1
            else:
                per_epoch = max(1, self.rollout_steps // self.minibatch_size)
                self.lyapunov_steps = self.epochs * per_epoch
        if self.env != "quadrotor" and (self.reference_path or self.reward_weights):
            raise ValueError("reference_path and reward_weights apply to the quadrotor only")
        return self

    @property
    def off_policy(self) -> bool:
        return self.algo in OFF_POLICY_ALGOS

    @property
    def uses_lyapunov(self) -> bool:
        return self.algo in LYAPUNOV_ALGOS

    @property
    def state_only_lyapunov(self) -> bool:
        return self.algo == "lppo-onpolicy-risk"

    @property
    def effective_beta(self) -> float:
        """β as applied to the policy objective; plain SAC/PPO ignore it."""
        return self.beta if self.uses_lyapunov else 0.0

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def parse_override(value: str) -> Any:
    """Interpret a command-line value as JSON when possible, else as a string."""
    try:
        return json.loads(value)
    except (json.JSONDecodeError, TypeError):
        return value


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional JSON file plus overrides.

    Overrides win over file values, which win over defaults. Hyphens in
    override keys are read as underscores.

    Raises:
        ConfigError: If the file is unreadable or validation fails
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must be a JSON object")
    for key, value in (overrides or {}).items():
        data[key.replace("-", "_")] = value
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
    logger.debug(f"Resolved config: {config.resolved()}")
    return config
