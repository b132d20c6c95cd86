"""
Replay buffer D for off-policy training.
"""

from __future__ import annotations

import numpy as np

from lyacert.buffers.transitions import Transition, TransitionBatch
from lyacert.core.errors import ContractViolation


class ReplayBuffer:
    """
    Fixed-capacity ring of transitions with uniform sampling.

    Once full, each push overwrites the oldest transition.
    """

    def __init__(self, state_dim: int, action_dim: int, capacity: int = 1_000_000):
        if capacity <= 0:
            raise ContractViolation(f"capacity must be positive, got {capacity}")
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.capacity = capacity
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._dones = np.zeros(capacity)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, transition: Transition) -> None:
        """
        Insert a transition.

        Raises:
            ContractViolation: On vector length mismatch or non-finite reward
        """
        s = np.asarray(transition.state, dtype=np.float64)
        a = np.asarray(transition.action, dtype=np.float64)
        s2 = np.asarray(transition.next_state, dtype=np.float64)
        if s.shape != (self.state_dim,) or s2.shape != (self.state_dim,) or a.shape != (
            self.action_dim,
        ):
            raise ContractViolation(
                f"Transition shapes {s.shape}/{a.shape}/{s2.shape} do not match "
                f"state_dim={self.state_dim}, action_dim={self.action_dim}"
            )
        if not np.isfinite(transition.reward):
            raise ContractViolation(f"Non-finite reward {transition.reward}")
        i = self._cursor
        self._states[i] = s
        self._actions[i] = a
        self._rewards[i] = transition.reward
        self._next_states[i] = s2
        self._dones[i] = float(transition.done)
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample_minibatch(self, n: int, rng: np.random.Generator) -> TransitionBatch:
        """
        Draw n transitions uniformly with replacement from the filled slots.

        Raises:
            ContractViolation: If the buffer is empty or holds fewer than n transitions
        """
        if self._size == 0:
            raise ContractViolation("Cannot sample from an empty replay buffer")
        if n <= 0 or n > self._size:
            raise ContractViolation(f"Requested {n} samples from a buffer of size {self._size}")
        idx = rng.integers(0, self._size, size=n)
        return self._gather(idx)

    def all(self) -> TransitionBatch:
        """Every stored transition, oldest first."""
        if self._size == 0:
            raise ContractViolation("Replay buffer is empty")
        if self._size < self.capacity:
            idx = np.arange(self._size)
        else:
            idx = (np.arange(self.capacity) + self._cursor) % self.capacity
        return self._gather(idx)

    def _gather(self, idx: np.ndarray) -> TransitionBatch:
        return TransitionBatch(
            self._states[idx].copy(),
            self._actions[idx].copy(),
            self._rewards[idx].copy(),
            self._next_states[idx].copy(),
            self._dones[idx].copy(),
        )
