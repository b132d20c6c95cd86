"""
Fit a Lyapunov function to a policy that was trained without one.

Plain SAC/PPO checkpoints carry no Lyapunov network; fitting one on
closed-loop data of the frozen policy makes their violation statistics
comparable with LSAC/LPPO.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from lyacert.buffers.transitions import TransitionBatch
from lyacert.cert.evaluation import collect_transitions
from lyacert.envs.base import Environment
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.lyapunov.risk import training_risk
from lyacert.nn.adam import AdamState, adam_step
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


def fit_posthoc_lyapunov(
    env: Environment,
    policy: SquashedGaussianPolicy,
    steps: int,
    rng: np.random.Generator,
    hidden: Sequence[int] = (64, 64),
    mu: float = 0.01,
    learning_rate: float = 3e-4,
    batch_size: int = 256,
    n_transitions: int = 10_000,
    data: Optional[TransitionBatch] = None,
) -> Tuple[LyapunovFunction, float]:
    """
    Minimize the training risk of a fresh L(s, a) on data from a frozen policy.

    Returns:
        (fitted Lyapunov function, training risk of the last step)
    """
    spec = env.spec
    batch = data if data is not None else collect_transitions(env, policy, n_transitions, rng)
    lyap = LyapunovFunction.initialize(
        spec.state_dim, spec.action_dim, hidden, rng, mu=mu, dt=spec.dt, goal=spec.goal
    )
    optimizer = AdamState.for_net(lyap.net, learning_rate)
    size = min(batch_size, len(batch))
    last = float("nan")
    for step in range(steps):
        mb = batch.subset(rng.integers(0, len(batch), size=size))
        risk = training_risk(mb, lyap, policy)
        adam_step(lyap.net, risk.grads["lyapunov"], optimizer)
        last = risk.value
        if (step + 1) % 1000 == 0:
            logger.debug(f"Post-hoc fit step {step + 1}: risk {last:.4e}")
    logger.info(
        f"Post-hoc Lyapunov fit: {steps} steps on {len(batch)} transitions, risk {last:.4e}"
    )
    return lyap, last
