"""
Quadrotor trajectory tracking with body-rate control.

The vehicle is a point mass with attitude: thrust F_z acts along the body
z axis and the commanded body rates are tracked perfectly (no rotational
inertia). One step of length Δt applies

    v' = v + (R(q) e₃ F_z / m − g e₃) Δt
    p' = p + v' Δt
    ω' = ω_cmd
    q' = normalize(q ⊗ exp(½ ω' Δt))

The agent observes errors against a recorded reference trajectory:
position, orientation quaternion q_ref⁻¹ ⊗ q, velocity and body rate,
each scaled by a fixed constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from lyacert.core.errors import ContractViolation, EpisodeEnd, ReferenceGenerationError
from lyacert.envs import quaternion as quat
from lyacert.envs.base import Environment, EnvSpec, StepResult
from lyacert.utils.csvio import read_csv, write_csv

logger = logging.getLogger(__name__)

E3 = np.array([0.0, 0.0, 1.0])
REFERENCE_HEADER = [
    "t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"
]
ACTION_HEADER = ["Fz", "wx", "wy", "wz"]


@dataclass(frozen=True)
class QuadrotorParams:
    mass: float = 1.0
    gravity: float = 9.81
    dt: float = 0.02
    max_rate: float = float(np.pi)
    episode_length: int = 500
    position_weight: float = 1.0
    velocity_weight: float = 0.1
    attitude_weight: float = 0.1
    rate_weight: float = 0.01
    position_scale: float = 5.0
    velocity_scale: float = 5.0
    rate_scale: float = float(np.pi)
    reset_noise: float = 0.25
    start_position: Tuple[float, float, float] = (1.0, 0.0, 2.0)
    max_position_error: float = 5.0

    @property
    def max_thrust(self) -> float:
        return 2.0 * self.mass * self.gravity

    @property
    def hover_thrust(self) -> float:
        return self.mass * self.gravity

    def action_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        low = np.array([0.0, -self.max_rate, -self.max_rate, -self.max_rate])
        high = np.array([self.max_thrust, self.max_rate, self.max_rate, self.max_rate])
        return low, high


@dataclass
class QuadrotorState:
    """Position p (m), unit quaternion q (w, x, y, z), velocity v (m/s), body rates ω (rad/s)."""

    position: np.ndarray
    quaternion: np.ndarray
    velocity: np.ndarray
    rates: np.ndarray

    @classmethod
    def at_rest(cls, position: Sequence[float] = (0.0, 0.0, 0.0)) -> "QuadrotorState":
        position = np.asarray(position, dtype=np.float64)
        return cls(position, quat.IDENTITY.copy(), np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "QuadrotorState":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (13,):
            raise ContractViolation(f"Quadrotor state vector must have 13 entries, got {vec.shape}")
        return cls(vec[0:3].copy(), vec[3:7].copy(), vec[7:10].copy(), vec[10:13].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.quaternion, self.velocity, self.rates])

    def copy(self) -> "QuadrotorState":
        return QuadrotorState.from_vector(self.as_vector())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_vector())))


@dataclass
class ReferenceTrajectory:
    """Timestamped states at a fixed step dt."""

    dt: float
    states: List[QuadrotorState] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.dt

    def __getitem__(self, index: int) -> QuadrotorState:
        if index < 0 or index >= len(self.states):
            raise EpisodeEnd(
                f"Step index {index} is beyond the reference ({len(self.states)} states)"
            )
        return self.states[index]

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.states])

    def bounding_box_diagonal(self) -> float:
        pos = self.positions()
        return float(np.linalg.norm(pos.max(axis=0) - pos.min(axis=0)))

    def to_csv(self, path: Union[str, Path]) -> int:
        rows = ([t, *s.as_vector()] for t, s in zip(self.times, self.states))
        return write_csv(path, REFERENCE_HEADER, rows)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "ReferenceTrajectory":
        rows = read_csv(path, REFERENCE_HEADER)
        if len(rows) < 2:
            raise ContractViolation(f"{path}: a reference needs at least two states")
        times = np.array([float(r["t"]) for r in rows])
        steps = np.diff(times)
        if np.any(steps <= 0.0) or not np.allclose(steps, steps[0]):
            raise ContractViolation(f"{path}: timestamps must increase uniformly")
        states = [
            QuadrotorState.from_vector(np.array([float(r[k]) for k in REFERENCE_HEADER[1:]]))
            for r in rows
        ]
        return cls(dt=float(steps[0]), states=states)


def _clip_action(action: np.ndarray, params: QuadrotorParams) -> np.ndarray:
    action = np.asarray(action, dtype=np.float64).reshape(-1)
    if action.shape != (4,):
        raise ContractViolation(f"Quadrotor action must be [F_z, wx, wy, wz], got {action.shape}")
    low, high = params.action_bounds()
    return np.clip(action, low, high)


def tracking_reward(state: QuadrotorState, ref: QuadrotorState, params: QuadrotorParams) -> float:
    p_e = state.position - ref.position
    v_e = state.velocity - ref.velocity
    w_e = state.rates - ref.rates
    alignment = abs(float(np.dot(state.quaternion, ref.quaternion)))
    cost = (
        params.position_weight * float(p_e @ p_e)
        + params.velocity_weight * float(v_e @ v_e)
        + params.attitude_weight * (1.0 - alignment)
        + params.rate_weight * float(w_e @ w_e)
    )
    return -cost


def quadrotor_step(
    state: QuadrotorState,
    action: np.ndarray,
    ref: Optional[QuadrotorState] = None,
    params: QuadrotorParams = QuadrotorParams(),
) -> Tuple[QuadrotorState, float]:
    """
    Advance the rigid body one step.

    Args:
        state: Current state
        action: ``[F_z, ω_x, ω_y, ω_z]``, clipped to the action box
        ref: Reference state the post-step state is scored against; reward
            is 0.0 when omitted
        params: Physical and reward constants

    Returns:
        (next state, reward)
    """
    u = _clip_action(action, params)
    thrust, rates = u[0], u[1:]
    dt = params.dt

    thrust_axis = quat.rotation_matrix(state.quaternion) @ E3
    accel = thrust_axis * (thrust / params.mass) - params.gravity * E3
    velocity = state.velocity + accel * dt
    position = state.position + velocity * dt
    q = quat.normalize(quat.multiply(state.quaternion, quat.exp_rotation(rates, dt)))
    nxt = QuadrotorState(position, q, velocity, rates.copy())

    reward = tracking_reward(nxt, ref, params) if ref is not None else 0.0
    return nxt, reward


def generate_reference(
    actions: Sequence[np.ndarray],
    params: QuadrotorParams = QuadrotorParams(),
    initial: Optional[QuadrotorState] = None,
) -> ReferenceTrajectory:
    """
    Record an open-loop rollout as a reference trajectory.

    The first recorded state is the initial state, so ``len(result) == len(actions) + 1``.

    Raises:
        ReferenceGenerationError: If the rollout leaves the finite reals
    """
    state = initial.copy() if initial is not None else QuadrotorState.at_rest(params.start_position)
    traj = ReferenceTrajectory(dt=params.dt, states=[state])
    for k, action in enumerate(actions):
        state, _ = quadrotor_step(state, action, None, params)
        if not state.is_finite():
            raise ReferenceGenerationError(f"Non-finite state at reference step {k + 1}")
        traj.states.append(state)
    logger.debug(f"Generated reference with {len(traj)} states, dt={params.dt}")
    return traj


def default_reference_actions(
    params: QuadrotorParams = QuadrotorParams(), steps: Optional[int] = None
) -> np.ndarray:
    """
    A smooth maneuver: zero-mean periodic roll and pitch, slow yaw, trimmed thrust.

    Roll and pitch oscillate around level (about ±0.2 and ±0.1 rad), so the
    path sways and drifts without running away; the thrust trim offsets the
    mean vertical loss of the tilted thrust vector.
    """
    n = steps if steps is not None else params.episode_length
    t = np.arange(n) * params.dt
    period = 5.0
    amplitude = 0.25
    omega = 2.0 * np.pi / period
    roll_tilt = amplitude / omega
    pitch_tilt = amplitude / (2.0 * omega)
    thrust = params.hover_thrust * (1.0 + 0.25 * (roll_tilt**2 + pitch_tilt**2))
    return np.column_stack(
        [
            np.full(n, thrust),
            amplitude * np.cos(omega * t),
            amplitude * np.cos(2.0 * omega * t),
            np.full(n, 0.1),
        ]
    )


def read_actions_csv(path: Union[str, Path]) -> np.ndarray:
    rows = read_csv(path, ACTION_HEADER)
    return np.array([[float(r[k]) for k in ACTION_HEADER] for r in rows])


def quadrotor_observe(
    state: QuadrotorState,
    ref: ReferenceTrajectory,
    step_index: int,
    params: QuadrotorParams = QuadrotorParams(),
) -> np.ndarray:
    """
    13-vector of scaled tracking errors against the reference at step_index.

    Raises:
        EpisodeEnd: If step_index is beyond the reference
    """
    target = ref[step_index]
    p_e = (state.position - target.position) / params.position_scale
    q_e = quat.error(state.quaternion, target.quaternion)
    v_e = (state.velocity - target.velocity) / params.velocity_scale
    w_e = (state.rates - target.rates) / params.rate_scale
    return np.concatenate([p_e, q_e, v_e, w_e])


QUADROTOR_GOAL = np.concatenate([np.zeros(3), quat.IDENTITY, np.zeros(6)])


class QuadrotorEnv(Environment):
    """
    Tracking task over a fixed reference.

    Episodes truncate when the reference runs out and terminate when the
    position error exceeds ``max_position_error``.
    """

    def __init__(
        self,
        params: Optional[QuadrotorParams] = None,
        reference: Optional[ReferenceTrajectory] = None,
        episode_length: Optional[int] = None,
    ):
        self.params = params or QuadrotorParams()
        length = episode_length or self.params.episode_length
        if reference is None:
            actions = default_reference_actions(self.params, length)
            reference = generate_reference(actions, self.params)
        if len(reference) < 2:
            raise ContractViolation("Reference trajectory needs at least two states")
        self.reference = reference
        length = min(length, len(reference) - 1)
        low, high = self.params.action_bounds()
        self.spec = EnvSpec(
            name="quadrotor",
            state_dim=13,
            action_dim=4,
            action_low=low,
            action_high=high,
            dt=self.params.dt,
            episode_length=length,
            goal=QUADROTOR_GOAL.copy(),
        )
        self.state = reference[0].copy()
        self.steps = 0

    def reset(self, rng: np.random.Generator, initial_state: Optional[Any] = None) -> np.ndarray:
        if initial_state is None:
            self.state = self.reference[0].copy()
            noise = self.params.reset_noise
            self.state.position = self.state.position + rng.uniform(-noise, noise, size=3)
        elif isinstance(initial_state, QuadrotorState):
            self.state = initial_state.copy()
        else:
            self.state = QuadrotorState.from_vector(np.asarray(initial_state))
        self.steps = 0
        return quadrotor_observe(self.state, self.reference, 0, self.params)

    def step(self, action: np.ndarray) -> StepResult:
        target = self.reference[self.steps + 1]
        self.state, reward = quadrotor_step(self.state, action, target, self.params)
        self.steps += 1
        obs = quadrotor_observe(self.state, self.reference, self.steps, self.params)
        error = float(np.linalg.norm(self.state.position - target.position))
        done = error > self.params.max_position_error or not self.state.is_finite()
        truncated = self.steps >= self.spec.episode_length
        return StepResult(obs, float(reward), done, truncated and not done)

    def position_error(self, observation: np.ndarray) -> Optional[float]:
        p_e = np.asarray(observation, dtype=np.float64)[:3] * self.params.position_scale
        return float(np.linalg.norm(p_e))

    def tracking_extent(self) -> Optional[float]:
        return self.reference.bounding_box_diagonal()
