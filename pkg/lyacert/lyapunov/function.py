"""
The learned Lyapunov candidate L(s, a) and its finite-difference Lie derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from lyacert.core.errors import ContractViolation
from lyacert.nn.dense import DenseNet
from lyacert.nn.policy import SquashedGaussianPolicy


@dataclass
class LyapunovFunction:
    """
    State-action Lyapunov network with its decrease rate and time step.

    With ``action_dim = 0`` the network sees states only; this is the
    state-only candidate L(s) used by the on-policy risk.

    Attributes:
        net: DenseNet mapping ``s ⧺ a`` to a scalar, output unconstrained
        mu: Minimum decrease rate (>= 0)
        dt: Environment time step between s and s'
        goal: Goal state s_G
        action_dim: Width of the action part of the input
    """

    net: DenseNet
    mu: float
    dt: float
    goal: np.ndarray
    action_dim: int

    def __post_init__(self) -> None:
        self.goal = np.asarray(self.goal, dtype=np.float64).reshape(-1)
        if self.mu < 0.0:
            raise ContractViolation(f"mu must be >= 0, got {self.mu}")
        if self.dt <= 0.0:
            raise ContractViolation(f"dt must be positive, got {self.dt}")
        if self.net.output_size != 1:
            raise ContractViolation("Lyapunov network must have a scalar output")
        if self.net.input_size != self.goal.size + self.action_dim:
            raise ContractViolation(
                f"Lyapunov input width {self.net.input_size} != "
                f"state_dim {self.goal.size} + action_dim {self.action_dim}"
            )

    @classmethod
    def initialize(
        cls,
        state_dim: int,
        action_dim: int,
        hidden: Sequence[int],
        rng: np.random.Generator,
        mu: float,
        dt: float,
        goal: np.ndarray,
        activation: str = "tanh",
    ) -> "LyapunovFunction":
        net = DenseNet.initialize(
            [state_dim + action_dim, *hidden, 1], rng, hidden_activation=activation
        )
        return cls(net, mu, dt, goal, action_dim)

    @property
    def state_dim(self) -> int:
        return int(self.goal.size)

    @property
    def state_only(self) -> bool:
        return self.action_dim == 0

    def copy(self) -> "LyapunovFunction":
        return LyapunovFunction(
            self.net.copy(), self.mu, self.dt, self.goal.copy(), self.action_dim
        )

    def inputs(self, states: np.ndarray, actions: Optional[np.ndarray] = None) -> np.ndarray:
        """Network input rows for a batch of states and actions."""
        s = np.atleast_2d(np.asarray(states, dtype=np.float64))
        if s.shape[1] != self.state_dim:
            raise ContractViolation(f"States have width {s.shape[1]}, expected {self.state_dim}")
        if self.state_only:
            return s
        if actions is None:
            raise ContractViolation("A state-action Lyapunov function needs actions")
        a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        return np.concatenate([s, a], axis=1)

    def value(self, states: np.ndarray, actions: Optional[np.ndarray] = None) -> np.ndarray:
        """L(s, a) for a batch, shape ``(B,)``."""
        return self.net.forward(self.inputs(states, actions))[:, 0]

    def on_policy(self, states: np.ndarray, policy: SquashedGaussianPolicy) -> np.ndarray:
        """L(s, π(s)) with the policy's deterministic mean action."""
        if self.state_only:
            return self.value(states)
        return self.value(states, policy.mean_action(np.atleast_2d(states)))

    def goal_value(self, policy: SquashedGaussianPolicy) -> float:
        """L(s_G, π(s_G))."""
        return float(self.on_policy(self.goal[None, :], policy)[0])

    def lie_derivative(
        self,
        states: np.ndarray,
        actions: Optional[np.ndarray],
        next_states: np.ndarray,
        policy: SquashedGaussianPolicy,
    ) -> np.ndarray:
        """
        Off-policy finite-difference Lie derivative.

        (L(s', π(s')) − L(s, a)) / Δt, where π(s') is the current policy's
        mean action. For a state-only candidate this is (L(s') − L(s)) / Δt.

        Returns:
            ``(B,)`` array, one value per transition
        """
        now = self.value(states, actions)
        nxt = self.on_policy(next_states, policy)
        return (nxt - now) / self.dt

    def to_meta(self) -> Dict[str, Any]:
        return {
            "mu": self.mu,
            "dt": self.dt,
            "goal": self.goal.tolist(),
            "action_dim": self.action_dim,
        }

    @classmethod
    def from_meta(cls, net: DenseNet, meta: Dict[str, Any]) -> "LyapunovFunction":
        return cls(
            net,
            float(meta["mu"]),
            float(meta["dt"]),
            np.asarray(meta["goal"], dtype=np.float64),
            int(meta["action_dim"]),
        )
