"""
Off-policy training loop for SAC and LSAC.

Per environment step: act, store the transition in D, then (after warm-up)
run the Lyapunov steps on minibatches of D followed by one V/Q/π update
and the polyak target update. Plain SAC is the same loop with no
Lyapunov function.
"""

from __future__ import annotations

import logging
from typing import Dict, Optional

import numpy as np

from lyacert.algorithms.common import SeedLike, Trainer
from lyacert.algorithms.sac import SacAgent, sac_update
from lyacert.buffers.replay import ReplayBuffer
from lyacert.buffers.transitions import Transition, TransitionBatch
from lyacert.envs.base import Environment
from lyacert.lyapunov.risk import certification_risk, training_risk
from lyacert.models.reports import RunReport
from lyacert.models.run_config import RunConfig
from lyacert.nn.checkpoint import Checkpoint
from lyacert.nn.loss import LossResult

logger = logging.getLogger(__name__)


class LsacTrainer(Trainer):
    """SAC-family trainer; LSAC when the config carries a Lyapunov function."""

    def __init__(self, env: Environment, config: RunConfig, rng: SeedLike = None, **kwargs):
        super().__init__(env, config, rng, **kwargs)
        spec = env.spec
        self.agent = SacAgent.create(spec, config, self.streams.init)
        self.buffer = ReplayBuffer(spec.state_dim, spec.action_dim, config.replay_capacity)
        self._last: Dict[str, LossResult] = {}
        self._last_lyap_batch: Optional[TransitionBatch] = None
        self._last_risk: Optional[float] = None

    def _act(self, obs: np.ndarray) -> np.ndarray:
        if self.steps < self.config.warmup_steps:
            return self.env.random_action(self.streams.noise)
        noise = self.streams.noise.standard_normal((1, self.env.spec.action_dim))
        return self.agent.policy.sample(obs, noise).action[0]

    def _train(self) -> None:
        env, config = self.env, self.config
        obs = env.reset(self.streams.env)
        episode_return = 0.0
        while self.steps < config.steps:
            previous = self.steps
            action = self._act(obs)
            result = env.step(action)
            self.buffer.push(
                Transition(obs, action, result.reward, result.observation, result.done)
            )
            episode_return += result.reward
            self.steps += 1
            self.metrics.increment("env_steps")
            obs = result.observation

            if result.done or result.truncated:
                self.report.add_episode(self.steps, episode_return)
                logger.debug(f"Episode ended at step {self.steps} with return {episode_return:.3f}")
                episode_return = 0.0
                obs = env.reset(self.streams.env)

            if self.steps >= config.warmup_steps:
                self._fit_lyapunov()
                self._update_agent()

            if self.steps % config.log_interval == 0 and self._last:
                self._log_update()
            self._maybe_checkpoint(previous)

    def _fit_lyapunov(self) -> None:
        if self.lyapunov is None:
            return
        lc = self.lyapunov_config
        with self.metrics.timer("phase", {"phase": "lyapunov"}):
            for _ in range(lc.steps):
                batch = self.buffer.sample_minibatch(
                    min(lc.batch_size, len(self.buffer)), self.streams.lyapunov
                )
                risk = training_risk(batch, self.lyapunov, self.agent.policy, mu=lc.mu)
                self._lyapunov_step(risk)
                self._last_lyap_batch = batch
                self._last_risk = risk.value

    def _update_agent(self) -> None:
        batch = self.buffer.sample_minibatch(
            min(self.config.batch_size, len(self.buffer)), self.streams.update
        )
        lc = self.lyapunov_config
        with self.metrics.timer("phase", {"phase": "agent"}):
            self._last = sac_update(
                self.agent, batch, self.streams.noise, self.lyapunov, lc.beta, lc.mu
            )
        self.metrics.increment("updates", tags={"phase": "agent"})

    def _log_update(self) -> None:
        losses = self._last
        entropy = float(losses["policy"].aux["entropy"])
        if entropy < self.agent.target_entropy:
            logger.debug(
                f"Policy entropy {entropy:.3f} below target {self.agent.target_entropy:.3f} "
                f"at step {self.steps}"
            )
        cert = violations = None
        if self.lyapunov is not None and self._last_lyap_batch is not None:
            check = certification_risk(self._last_lyap_batch, self.lyapunov, self.agent.policy)
            cert = check.value
            violations = float(np.mean(check.aux["lie"] > 0.0))
        self.report.add_update(
            self.steps,
            policy_loss=losses["policy"].value,
            q_loss=losses["q"].value,
            value_loss=losses["value"].value,
            lyapunov_risk=self._last_risk,
            certification_risk=cert,
            violation_fraction=violations,
            entropy=entropy,
        )
        for name, loss in losses.items():
            self.metrics.set_gauge("loss", loss.value, {"name": name})
        logger.info(
            f"step {self.steps}: policy {losses['policy'].value:.4f} q {losses['q'].value:.4f} "
            f"v {losses['value'].value:.4f} lyapunov {self._last_risk} cert {cert}"
        )

    def checkpoint(self) -> Checkpoint:
        nets = {name: net.copy() for name, net in self.agent.nets.items()}
        if self.lyapunov is not None:
            nets["lyapunov"] = self.lyapunov.net.copy()
        return Checkpoint(nets=nets, meta=self._base_meta(self.agent.policy))


def train_lsac(env: Environment, config: RunConfig, rng: SeedLike = None) -> RunReport:
    """
    Train SAC or LSAC for ``config.steps`` environment steps.

    Raises:
        NumericalAbort: On a non-finite loss, carrying the partial report
    """
    return LsacTrainer(env, config, rng).run()
