"""
Lie-derivative violation scans over closed-loop rollouts.
"""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from lyacert.cert.evaluation import rollout_trajectory
from lyacert.envs.base import Environment
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.models.reports import ViolationReport
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


def violation_scan(
    env: Environment,
    policy: SquashedGaussianPolicy,
    lyap: LyapunovFunction,
    episodes: int,
    rng: np.random.Generator,
    max_steps: Optional[int] = None,
) -> ViolationReport:
    """
    Count transitions whose Lie derivative is strictly positive.

    Rolls out `episodes` deterministic-mean episodes from random starts and
    evaluates the off-policy Lie derivative of every transition.
    """
    states: List[List[float]] = []
    lies: List[float] = []
    for _ in range(max(episodes, 0)):
        traj = rollout_trajectory(env, policy, rng, max_steps=max_steps)
        if len(traj) == 0:
            continue
        batch = traj.transitions()
        actions = None if lyap.state_only else batch.actions
        lie = lyap.lie_derivative(batch.states, actions, batch.next_states, policy)
        states.extend(batch.states.tolist())
        lies.extend(float(v) for v in lie)

    total = len(lies)
    flags = [v > 0.0 for v in lies]
    count = int(sum(flags))
    report = ViolationReport(
        total=total,
        count=count,
        fraction=count / total if total else 0.0,
        episodes=max(episodes, 0),
        violating_states=[s for s, bad in zip(states, flags) if bad],
        mean_lie=float(np.mean(lies)) if lies else None,
        max_lie=float(np.max(lies)) if lies else None,
        states=states,
        lie_values=lies,
    )
    logger.info(f"Violation scan: {count}/{total} transitions ({100.0 * report.fraction:.2f}%)")
    return report
