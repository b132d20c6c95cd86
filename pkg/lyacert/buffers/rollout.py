"""
Rollout buffer B for on-policy training.
"""

from __future__ import annotations

from typing import List

import numpy as np

from lyacert.buffers.transitions import Transition, TransitionBatch
from lyacert.core.errors import ContractViolation


class RolloutBuffer:
    """
    Ordered transitions of one collection phase with per-step policy data.

    Besides (s, a, r, s', done) every step stores the pre-squash sample and
    its log-probability under the collecting policy, and whether the
    episode ended there (terminal or truncated). Values are recomputed by
    `compute_advantages` after collection.
    """

    def __init__(self, state_dim: int, action_dim: int):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.clear()

    def clear(self) -> None:
        self.transitions: List[Transition] = []
        self.raw_actions: List[np.ndarray] = []
        self.log_probs: List[float] = []
        self.episode_ends: List[bool] = []

    def __len__(self) -> int:
        return len(self.transitions)

    def push(
        self,
        transition: Transition,
        log_prob: float = 0.0,
        raw_action: np.ndarray = None,
        episode_end: bool = False,
    ) -> None:
        """
        Append a step.

        Raises:
            ContractViolation: On vector length mismatch
        """
        if np.shape(transition.state) != (self.state_dim,) or np.shape(transition.action) != (
            self.action_dim,
        ):
            raise ContractViolation("Transition shapes do not match the rollout buffer")
        self.transitions.append(transition)
        self.raw_actions.append(
            np.asarray(transition.action if raw_action is None else raw_action, dtype=np.float64)
        )
        self.log_probs.append(float(log_prob))
        self.episode_ends.append(bool(episode_end or transition.done))

    def as_batch(self) -> TransitionBatch:
        return TransitionBatch.from_transitions(self.transitions)

    def raw_action_array(self) -> np.ndarray:
        return np.array(self.raw_actions)

    def log_prob_array(self) -> np.ndarray:
        return np.array(self.log_probs)

    def episode_end_array(self) -> np.ndarray:
        return np.array(self.episode_ends, dtype=np.float64)
