"""
Generalized advantage estimation over a rollout.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np

from lyacert.buffers.rollout import RolloutBuffer
from lyacert.core.errors import ContractViolation


def compute_advantages(
    rollout: RolloutBuffer,
    value_fn: Callable[[np.ndarray], np.ndarray],
    gamma: float = 0.99,
    lam: float = 0.95,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    GAE(λ) advantages and value targets.

    δ_t = r_t + γ (1 − done_t) V(s_{t+1}) − V(s_t) and
    Â_t = δ_t + γλ Â_{t+1}, with the sum cut at every episode end and at
    the end of the rollout. λ = 1 gives the plain discounted sum of TD
    residuals. Advantages are returned unnormalized.

    Returns:
        (advantages, returns) with returns = Â + V(s)
    """
    if len(rollout) == 0:
        raise ContractViolation("Cannot compute advantages of an empty rollout")
    if not 0.0 < gamma <= 1.0:
        raise ContractViolation(f"gamma must be in (0, 1], got {gamma}")
    if not 0.0 <= lam <= 1.0:
        raise ContractViolation(f"lambda must be in [0, 1], got {lam}")

    batch = rollout.as_batch()
    values = np.asarray(value_fn(batch.states), dtype=np.float64).reshape(-1)
    next_values = np.asarray(value_fn(batch.next_states), dtype=np.float64).reshape(-1)
    return gae(
        batch.rewards, values, next_values, batch.dones, rollout.episode_end_array(), gamma, lam
    )


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    next_values: np.ndarray,
    dones: np.ndarray,
    episode_ends: np.ndarray,
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Array form of `compute_advantages`."""
    deltas = rewards + gamma * (1.0 - dones) * next_values - values
    advantages = np.zeros_like(deltas)
    running = 0.0
    for t in range(len(deltas) - 1, -1, -1):
        if episode_ends[t]:
            running = 0.0
        running = deltas[t] + gamma * lam * running
        advantages[t] = running
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """Zero mean, unit variance; a single advantage maps to 0."""
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)
