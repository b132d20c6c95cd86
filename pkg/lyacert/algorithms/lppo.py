"""
On-policy training loop for PPO, LPPO and the state-only risk baseline.

Each iteration collects N steps into the rollout buffer B, fits the
Lyapunov function on B, estimates GAE advantages with the current value
network, then runs epochs of shuffled minibatch updates. LPPO replaces
the advantages with their Lyapunov-augmented version; the
``lppo-onpolicy-risk`` variant fits a state-only candidate with the
on-policy risk instead.
"""

from __future__ import annotations

import logging
from typing import List

import numpy as np

from lyacert.algorithms.common import SeedLike, Trainer, apply_gradients
from lyacert.algorithms.ppo import (
    PpoAgent,
    PpoMinibatch,
    lppo_policy_loss,
    ppo_value_loss,
)
from lyacert.buffers.advantages import compute_advantages, normalize_advantages
from lyacert.buffers.rollout import RolloutBuffer
from lyacert.buffers.transitions import Transition, TransitionBatch
from lyacert.envs.base import Environment
from lyacert.lyapunov.risk import certification_risk, on_policy_risk, training_risk
from lyacert.models.reports import RunReport
from lyacert.models.run_config import RunConfig
from lyacert.nn.checkpoint import Checkpoint
from lyacert.nn.loss import LossResult

logger = logging.getLogger(__name__)


class LppoTrainer(Trainer):
    """PPO-family trainer."""

    def __init__(self, env: Environment, config: RunConfig, rng: SeedLike = None, **kwargs):
        super().__init__(env, config, rng, **kwargs)
        spec = env.spec
        self.agent = PpoAgent.create(spec, config, self.streams.init)
        self.rollout = RolloutBuffer(spec.state_dim, spec.action_dim)
        self._obs = None
        self._episode_return = 0.0

    def _collect(self, n: int) -> None:
        env, policy = self.env, self.agent.policy
        self.rollout.clear()
        for _ in range(n):
            obs = self._obs
            out = policy.sample(obs, self.streams.noise.standard_normal((1, env.spec.action_dim)))
            action = out.action[0]
            result = env.step(action)
            ended = result.done or result.truncated
            self.rollout.push(
                Transition(obs, action, result.reward, result.observation, result.done),
                log_prob=float(out.log_prob[0]),
                raw_action=out.raw[0],
                episode_end=ended,
            )
            self._episode_return += result.reward
            self.steps += 1
            self.metrics.increment("env_steps")
            self._obs = result.observation
            if ended:
                self.report.add_episode(self.steps, self._episode_return)
                self._episode_return = 0.0
                self._obs = env.reset(self.streams.env)

    def _lyapunov_risk(self, batch: TransitionBatch, with_grad: bool = True) -> LossResult:
        assert self.lyapunov is not None
        if self.lyapunov.state_only:
            return on_policy_risk(batch, self.lyapunov, with_grad=with_grad)
        return training_risk(batch, self.lyapunov, self.agent.policy, with_grad=with_grad)

    def _fit_lyapunov(self, batch: TransitionBatch) -> List[float]:
        risks: List[float] = []
        if self.lyapunov is None:
            return risks
        lc = self.lyapunov_config
        size = min(lc.batch_size, len(batch))
        with self.metrics.timer("phase", {"phase": "lyapunov"}):
            for _ in range(lc.steps):
                idx = self.streams.lyapunov.integers(0, len(batch), size=size)
                risk = self._lyapunov_risk(batch.subset(idx))
                self._lyapunov_step(risk)
                risks.append(risk.value)
        return risks

    def _optimize(self, batch: TransitionBatch) -> tuple:
        config, agent, lc = self.config, self.agent, self.lyapunov_config
        advantages, returns = compute_advantages(
            self.rollout, agent.values, agent.gamma, agent.gae_lambda
        )
        raw = self.rollout.raw_action_array()
        old_log_probs = self.rollout.log_prob_array()
        n = len(batch)
        policy_losses: List[float] = []
        value_losses: List[float] = []
        with self.metrics.timer("phase", {"phase": "agent"}):
            for _ in range(config.epochs):
                order = self.streams.update.permutation(n)
                for start in range(0, n, config.minibatch_size):
                    idx = order[start:start + config.minibatch_size]
                    mb = PpoMinibatch(
                        batch.states[idx],
                        batch.actions[idx],
                        batch.next_states[idx],
                        raw[idx],
                        old_log_probs[idx],
                        returns[idx],
                    )
                    adv = advantages[idx]
                    if config.normalize_advantages:
                        adv = normalize_advantages(adv)
                    pi_loss = lppo_policy_loss(
                        mb, agent.policy, adv, self.lyapunov, lc.beta, lc.mu, agent.clip_epsilon
                    )
                    apply_gradients(agent.nets, agent.optimizers, pi_loss)
                    v_loss = ppo_value_loss(mb.states, mb.returns, agent.value)
                    apply_gradients(agent.nets, agent.optimizers, v_loss)
                    policy_losses.append(pi_loss.value)
                    value_losses.append(v_loss.value)
                    self.metrics.increment("updates", tags={"phase": "agent"})
        return float(np.mean(policy_losses)), float(np.mean(value_losses))

    def _train(self) -> None:
        config = self.config
        if self.steps >= config.steps:
            return
        self._obs = self.env.reset(self.streams.env)
        iteration = 0
        while self.steps < config.steps:
            previous = self.steps
            self._collect(min(config.rollout_steps, config.steps - self.steps))
            batch = self.rollout.as_batch()
            risks = self._fit_lyapunov(batch)
            policy_loss, value_loss = self._optimize(batch)
            iteration += 1

            cert = violations = None
            if self.lyapunov is not None:
                check = (
                    on_policy_risk(batch, self.lyapunov, with_grad=False)
                    if self.lyapunov.state_only
                    else certification_risk(batch, self.lyapunov, self.agent.policy)
                )
                cert = check.value
                violations = float(np.mean(check.aux["lie"] > 0.0))
            entropy = -float(np.mean(self.rollout.log_prob_array()))
            self.report.add_update(
                self.steps,
                policy_loss=policy_loss,
                value_loss=value_loss,
                lyapunov_risk=risks[-1] if risks else None,
                certification_risk=cert,
                violation_fraction=violations,
                entropy=entropy,
            )
            self.metrics.set_gauge("loss", policy_loss, {"name": "policy"})
            self.metrics.set_gauge("loss", value_loss, {"name": "value"})
            logger.info(
                f"iteration {iteration} (step {self.steps}): policy {policy_loss:.4f} "
                f"value {value_loss:.4f} cert {cert} violations {violations}"
            )
            self._maybe_checkpoint(previous)

    def checkpoint(self) -> Checkpoint:
        nets = {name: net.copy() for name, net in self.agent.nets.items()}
        if self.lyapunov is not None:
            nets["lyapunov"] = self.lyapunov.net.copy()
        return Checkpoint(nets=nets, meta=self._base_meta(self.agent.policy))


def train_lppo(env: Environment, config: RunConfig, rng: SeedLike = None) -> RunReport:
    """
    Train PPO, LPPO or the state-only risk baseline for ``config.steps`` steps.

    Raises:
        NumericalAbort: On a non-finite loss, carrying the partial report
    """
    return LppoTrainer(env, config, rng).run()
