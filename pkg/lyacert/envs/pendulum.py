"""
Pendulum swing-up with the classic Pendulum-v1 dynamics.

θ = 0 is upright. Each step applies

    θ̈  = 3g/(2l) sin θ + 3/(m l²) τ
    θ̇' = clip(θ̇ + θ̈ Δt, ±max_speed)
    θ'  = θ + θ̇' Δt

and pays reward −(θ² + 0.1 θ̇² + 0.001 τ²) on the pre-step state. The
agent observes [cos θ, sin θ, θ̇]; the goal observation is [1, 0, 0].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from lyacert.envs.base import Environment, EnvSpec, StepResult


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (−π, π]."""
    return float(np.pi - np.mod(np.pi - theta, 2.0 * np.pi))


@dataclass(frozen=True)
class PendulumParams:
    gravity: float = 10.0
    mass: float = 1.0
    length: float = 1.0
    dt: float = 0.05
    max_speed: float = 8.0
    max_torque: float = 2.0
    episode_length: int = 200


@dataclass(frozen=True)
class PendulumState:
    theta: float
    theta_dot: float

    def observation(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])


def pendulum_step(
    state: PendulumState, torque: float, params: PendulumParams = PendulumParams()
) -> Tuple[PendulumState, float]:
    """
    Advance the pendulum by one semi-implicit Euler step.

    The torque is clipped to ±max_torque.
    """
    u = float(np.clip(torque, -params.max_torque, params.max_torque))
    th, thdot = state.theta, state.theta_dot
    g, m, l, dt = params.gravity, params.mass, params.length, params.dt

    cost = wrap_angle(th) ** 2 + 0.1 * thdot**2 + 0.001 * u**2

    thddot = 3.0 * g / (2.0 * l) * np.sin(th) + 3.0 / (m * l**2) * u
    new_thdot = float(np.clip(thdot + thddot * dt, -params.max_speed, params.max_speed))
    new_th = wrap_angle(th + new_thdot * dt)
    return PendulumState(new_th, new_thdot), -cost


def pendulum_reset(rng: np.random.Generator) -> PendulumState:
    """Draw θ ~ U(−π, π), θ̇ ~ U(−1, 1)."""
    theta = rng.uniform(-np.pi, np.pi)
    theta_dot = rng.uniform(-1.0, 1.0)
    return PendulumState(wrap_angle(theta), float(theta_dot))


def observation_to_state(observation: np.ndarray) -> PendulumState:
    cos_th, sin_th, thdot = (float(v) for v in observation)
    return PendulumState(float(np.arctan2(sin_th, cos_th)), thdot)


class PendulumEnv(Environment):
    """Episodic wrapper around `pendulum_step`; episodes only truncate."""

    def __init__(
        self, params: Optional[PendulumParams] = None, episode_length: Optional[int] = None
    ):
        self.params = params or PendulumParams()
        length = episode_length or self.params.episode_length
        self.spec = EnvSpec(
            name="pendulum",
            state_dim=3,
            action_dim=1,
            action_low=np.array([-self.params.max_torque]),
            action_high=np.array([self.params.max_torque]),
            dt=self.params.dt,
            episode_length=length,
            goal=np.array([1.0, 0.0, 0.0]),
        )
        self.state = PendulumState(0.0, 0.0)
        self.steps = 0

    def reset(self, rng: np.random.Generator, initial_state: Optional[Any] = None) -> np.ndarray:
        if initial_state is None:
            self.state = pendulum_reset(rng)
        elif isinstance(initial_state, PendulumState):
            self.state = initial_state
        else:
            theta, theta_dot = initial_state
            self.state = PendulumState(wrap_angle(float(theta)), float(theta_dot))
        self.steps = 0
        return self.state.observation()

    def step(self, action: np.ndarray) -> StepResult:
        torque = float(self.clip_action(action)[0])
        self.state, reward = pendulum_step(self.state, torque, self.params)
        self.steps += 1
        truncated = self.steps >= self.spec.episode_length
        return StepResult(self.state.observation(), float(reward), False, truncated)
