"""Factories and small synthetic environments shared by the test modules."""

from typing import Any, Callable, Optional

import numpy as np

from lyacert.buffers.transitions import TransitionBatch
from lyacert.envs.base import Environment, EnvSpec, StepResult
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.nn.dense import DenseNet
from lyacert.nn.policy import SquashedGaussianPolicy

GRAD_SEEDS = list(range(10))


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """‖a − n‖ / (‖a‖ + ‖n‖), 0 when both vanish."""
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def numeric_gradient(loss: Callable[[], float], net: DenseNet, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of loss() w.r.t. every parameter of net."""
    flat = net.flat_parameters()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        net.set_flat_parameters(flat)
        up = loss()
        flat[i] = original - h
        net.set_flat_parameters(flat)
        down = loss()
        flat[i] = original
        net.set_flat_parameters(flat)
        grad[i] = (up - down) / (2.0 * h)
    return grad


def make_policy(
    rng: np.random.Generator,
    state_dim: int = 3,
    action_dim: int = 1,
    hidden=(8, 8),
    scale: float = 2.0,
) -> SquashedGaussianPolicy:
    low = -scale * np.ones(action_dim)
    high = scale * np.ones(action_dim)
    return SquashedGaussianPolicy.for_box(state_dim, low, high, list(hidden), rng)


def make_lyapunov(
    rng: np.random.Generator,
    state_dim: int = 3,
    action_dim: int = 1,
    hidden=(8, 8),
    mu: float = 0.1,
    dt: float = 0.05,
    goal: Optional[np.ndarray] = None,
) -> LyapunovFunction:
    goal = np.zeros(state_dim) if goal is None else goal
    return LyapunovFunction.initialize(state_dim, action_dim, list(hidden), rng, mu, dt, goal)


def make_batch(
    rng: np.random.Generator, size: int = 16, state_dim: int = 3, action_dim: int = 1
) -> TransitionBatch:
    return TransitionBatch(
        states=rng.normal(size=(size, state_dim)),
        actions=rng.uniform(-1.5, 1.5, size=(size, action_dim)),
        rewards=rng.normal(size=size),
        next_states=rng.normal(size=(size, state_dim)),
        dones=(rng.uniform(size=size) < 0.2).astype(np.float64),
    )


def linear_lyapunov(
    state_weights,
    action_weights=(),
    dt: float = 0.05,
    mu: float = 0.0,
    bias: float = 0.0,
    goal=None,
) -> LyapunovFunction:
    """L(s, a) = w_s · s + w_a · a + bias, a network without hidden layers."""
    w = np.concatenate([np.asarray(state_weights, float), np.asarray(action_weights, float)])
    net = DenseNet([w.size, 1], [w[None, :]], [np.array([bias])])
    n = len(state_weights)
    goal = np.zeros(n) if goal is None else np.asarray(goal, float)
    return LyapunovFunction(net, mu, dt, goal, len(action_weights))


def zero_policy(
    state_dim: int = 3, action_dim: int = 1, scale: float = 2.0
) -> SquashedGaussianPolicy:
    """Policy whose mean action is the box center (zero torque for the pendulum)."""
    trunk = DenseNet.zeros([state_dim, 4, 2 * action_dim])
    return SquashedGaussianPolicy(trunk, scale * np.ones(action_dim), np.zeros(action_dim))


class ScaledEnv(Environment):
    """
    1-D linear system s' = factor · s + shift, ignoring the action.

    factor < 1 with shift 0 contracts towards the goal 0; shift > 0 drifts.
    """

    def __init__(self, factor: float = 0.5, shift: float = 0.0, episode_length: int = 10):
        self.factor = factor
        self.shift = shift
        self.spec = EnvSpec(
            name="scaled",
            state_dim=1,
            action_dim=1,
            action_low=np.array([-1.0]),
            action_high=np.array([1.0]),
            dt=0.1,
            episode_length=episode_length,
            goal=np.zeros(1),
        )
        self.state = np.zeros(1)
        self.steps = 0

    def reset(self, rng: np.random.Generator, initial_state: Optional[Any] = None) -> np.ndarray:
        if initial_state is None:
            self.state = rng.uniform(1.0, 2.0, size=1)
        else:
            self.state = np.asarray(initial_state, dtype=np.float64).reshape(1)
        self.steps = 0
        return self.state.copy()

    def step(self, action: np.ndarray) -> StepResult:
        self.clip_action(action)
        self.state = self.factor * self.state + self.shift
        self.steps += 1
        return StepResult(
            self.state.copy(),
            -float(self.state[0] ** 2),
            False,
            self.steps >= self.spec.episode_length,
        )
