"""
Deterministic policy evaluation and trajectory export.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Union

import numpy as np

from lyacert.buffers.transitions import Transition, TransitionBatch
from lyacert.envs.base import Environment
from lyacert.models.reports import EvalSummary
from lyacert.nn.policy import SquashedGaussianPolicy
from lyacert.utils.csvio import write_csv

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """One closed-loop episode: observations s_0..s_T, actions and rewards."""

    dt: float
    observations: List[np.ndarray] = field(default_factory=list)
    actions: List[np.ndarray] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    dones: List[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def episode_return(self) -> float:
        return float(np.sum(self.rewards))

    def rms_position_error(self, env: Environment) -> Optional[float]:
        """Root-mean-square position error over the post-step states, or None."""
        errors = [env.position_error(obs) for obs in self.observations[1:]]
        if not errors or errors[0] is None:
            return None
        return float(np.sqrt(np.mean(np.square(errors))))

    def transitions(self) -> TransitionBatch:
        return TransitionBatch.from_transitions(
            [
                Transition(self.observations[k], self.actions[k], self.rewards[k],
                           self.observations[k + 1], self.dones[k])
                for k in range(len(self))
            ]
        )

    def to_csv(self, path: Union[str, Path]) -> int:
        """Columns ``t, s0.., a0.., r``; one row per step."""
        n = len(self.observations[0]) if self.observations else 0
        m = len(self.actions[0]) if self.actions else 0
        header = ["t"] + [f"s{i}" for i in range(n)] + [f"a{i}" for i in range(m)] + ["r"]
        rows = (
            [k * self.dt, *self.observations[k], *self.actions[k], self.rewards[k]]
            for k in range(len(self))
        )
        return write_csv(path, header, rows)


def rollout_trajectory(
    env: Environment,
    policy: SquashedGaussianPolicy,
    rng: np.random.Generator,
    initial_state: Optional[Any] = None,
    stochastic: bool = False,
    max_steps: Optional[int] = None,
) -> Trajectory:
    """
    Run one episode.

    Actions are the policy's deterministic mean unless `stochastic`, in
    which case noise is drawn from `rng` after the reset.
    """
    obs = env.reset(rng, initial_state)
    traj = Trajectory(dt=env.spec.dt, observations=[obs])
    limit = env.spec.episode_length if max_steps is None else max_steps
    for _ in range(limit):
        if stochastic:
            action = policy.sample(obs, rng.standard_normal((1, env.spec.action_dim))).action[0]
        else:
            action = policy.mean_action(obs)
        result = env.step(action)
        traj.actions.append(np.asarray(action, dtype=np.float64))
        traj.rewards.append(float(result.reward))
        traj.dones.append(bool(result.done))
        traj.observations.append(result.observation)
        obs = result.observation
        if result.done or result.truncated:
            break
    return traj


def evaluate_policy(
    env: Environment,
    policy: SquashedGaussianPolicy,
    episodes: int,
    rng: np.random.Generator,
    initial_state: Optional[Any] = None,
) -> EvalSummary:
    """
    Mean/std return and mean final distance to the goal over deterministic rollouts.

    Tracking environments also get the RMS position error of each episode,
    judged against the size of the reference path.

    Zero episodes give an empty summary with its ``error`` field set.
    """
    if episodes <= 0:
        logger.warning("evaluate_policy called with no episodes")
        return EvalSummary(error="no episodes evaluated")
    returns, distances, lengths, tracking = [], [], [], []
    for _ in range(episodes):
        traj = rollout_trajectory(env, policy, rng, initial_state)
        returns.append(traj.episode_return)
        distances.append(env.distance_to_goal(traj.observations[-1]))
        lengths.append(len(traj))
        rms = traj.rms_position_error(env)
        if rms is not None:
            tracking.append(rms)
    summary = EvalSummary.from_episodes(
        returns, distances, lengths, tracking or None, env.tracking_extent()
    )
    logger.info(
        f"Evaluated {episodes} episodes: return {summary.mean_return:.3f} "
        f"± {summary.std_return:.3f}, final distance {summary.mean_final_distance:.4f}"
    )
    if summary.mean_rms_position_error is not None:
        logger.info(
            f"RMS position error {summary.mean_rms_position_error:.4f} m "
            f"over a {summary.tracking_extent:.3f} m reference"
        )
    return summary


def collect_transitions(
    env: Environment,
    policy: SquashedGaussianPolicy,
    n: int,
    rng: np.random.Generator,
    stochastic: bool = True,
) -> TransitionBatch:
    """Gather n closed-loop transitions over as many episodes as it takes."""
    collected: List[Transition] = []
    while len(collected) < n:
        traj = rollout_trajectory(env, policy, rng, stochastic=stochastic)
        batch = traj.transitions()
        collected.extend(batch.transition(i) for i in range(len(batch)))
    return TransitionBatch.from_transitions(collected[:n])
