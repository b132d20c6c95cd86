"""
Replay buffer D, rollout buffer B and advantage estimation.
"""

from lyacert.buffers.advantages import compute_advantages, gae, normalize_advantages
from lyacert.buffers.replay import ReplayBuffer
from lyacert.buffers.rollout import RolloutBuffer
from lyacert.buffers.transitions import Transition, TransitionBatch

__all__ = [
    "compute_advantages",
    "gae",
    "normalize_advantages",
    "ReplayBuffer",
    "RolloutBuffer",
    "Transition",
    "TransitionBatch",
]
