"""
Transitions and batches of transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lyacert.core.errors import ContractViolation


@dataclass(frozen=True)
class Transition:
    """One environment step (s, a, r, s', done)."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool = False


@dataclass
class TransitionBatch:
    """
    Column-stacked transitions.

    Attributes:
        states: ``(B, n)``
        actions: ``(B, m)``
        rewards: ``(B,)``
        next_states: ``(B, n)``
        dones: ``(B,)`` float mask, 1.0 at terminal transitions
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __post_init__(self) -> None:
        b = self.states.shape[0]
        if (
            self.actions.shape[0] != b
            or self.rewards.shape != (b,)
            or self.next_states.shape != self.states.shape
            or self.dones.shape != (b,)
        ):
            raise ContractViolation("Inconsistent batch shapes")

    def __len__(self) -> int:
        return int(self.states.shape[0])

    @classmethod
    def from_transitions(cls, transitions: Sequence[Transition]) -> "TransitionBatch":
        if not transitions:
            raise ContractViolation("Cannot build a batch from zero transitions")
        return cls(
            states=np.array([t.state for t in transitions], dtype=np.float64),
            actions=np.array([t.action for t in transitions], dtype=np.float64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_states=np.array([t.next_state for t in transitions], dtype=np.float64),
            dones=np.array([float(t.done) for t in transitions]),
        )

    def subset(self, indices: np.ndarray) -> "TransitionBatch":
        return TransitionBatch(
            self.states[indices],
            self.actions[indices],
            self.rewards[indices],
            self.next_states[indices],
            self.dones[indices],
        )

    def transition(self, i: int) -> Transition:
        return Transition(
            self.states[i].copy(),
            self.actions[i].copy(),
            float(self.rewards[i]),
            self.next_states[i].copy(),
            bool(self.dones[i]),
        )
