"""
Environment interface shared by the pendulum and quadrotor.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np

from lyacert.core.errors import ContractViolation


@dataclass(frozen=True)
class EnvSpec:
    """
    Static description of an environment.

    Attributes:
        name: Registry name
        state_dim: Observation width seen by the agent
        action_dim: Action width
        action_low, action_high: Action box bounds
        dt: Time between consecutive observations (s)
        episode_length: Steps before truncation
        goal: Goal observation s_G
    """

    name: str
    state_dim: int
    action_dim: int
    action_low: np.ndarray
    action_high: np.ndarray
    dt: float
    episode_length: int
    goal: np.ndarray

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ContractViolation(f"dt must be positive, got {self.dt}")
        if self.goal.shape != (self.state_dim,):
            raise ContractViolation(f"goal must have shape ({self.state_dim},)")
        if self.action_low.shape != (self.action_dim,) or self.action_high.shape != (
            self.action_dim,
        ):
            raise ContractViolation("action bounds must have length action_dim")


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    done: bool
    truncated: bool


class Environment(ABC):
    """
    A deterministic environment driven by an explicit numpy Generator.

    `done` marks a terminal state (no bootstrap); `truncated` marks the end
    of the episode's time budget.
    """

    spec: EnvSpec

    @abstractmethod
    def reset(self, rng: np.random.Generator, initial_state: Optional[Any] = None) -> np.ndarray:
        """Start an episode and return the first observation."""

    @abstractmethod
    def step(self, action: np.ndarray) -> StepResult:
        """Advance one step."""

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (self.spec.action_dim,):
            raise ContractViolation(
                f"Action has shape {action.shape}, expected ({self.spec.action_dim},)"
            )
        return np.clip(action, self.spec.action_low, self.spec.action_high)

    def random_action(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.spec.action_low, self.spec.action_high)

    def distance_to_goal(self, observation: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(observation) - self.spec.goal))

    def position_error(self, observation: np.ndarray) -> Optional[float]:
        """Unscaled position tracking error (m), for tracking tasks only."""
        return None

    def tracking_extent(self) -> Optional[float]:
        """Size of the tracked path (m) that position errors are judged against."""
        return None
