"""
Proximal policy optimization losses and agent.

Ratios are formed from stored pre-squash samples (`log_prob_raw`), so the
old and new log-densities are evaluated at exactly the same point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from lyacert.core.errors import ContractViolation
from lyacert.envs.base import EnvSpec
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.models.run_config import RunConfig
from lyacert.nn.adam import AdamState
from lyacert.nn.dense import DenseNet, mlp
from lyacert.nn.loss import LossResult
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


@dataclass
class PpoAgent:
    """
    Policy π_φ and value V_θ with the clipping and GAE constants.

    Attributes:
        clip_epsilon: Ratio clip ε in (0, 1)
        gamma: Discount
        gae_lambda: GAE λ
    """

    policy: SquashedGaussianPolicy
    value: DenseNet
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    optimizers: Dict[str, AdamState] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ContractViolation(f"clip_epsilon must be in (0, 1), got {self.clip_epsilon}")

    @classmethod
    def create(cls, spec: EnvSpec, config: RunConfig, rng: np.random.Generator) -> "PpoAgent":
        hidden = config.hidden or [64, 64]
        policy = SquashedGaussianPolicy.for_box(
            spec.state_dim, spec.action_low, spec.action_high, hidden, rng, config.activation
        )
        value = mlp(spec.state_dim, hidden, 1, rng, config.activation)
        agent = cls(policy, value, config.clip_epsilon, config.gamma, config.gae_lambda)
        agent.optimizers = {
            "policy": AdamState.for_net(policy.trunk, config.lr_policy),
            "value": AdamState.for_net(value, config.lr_value),
        }
        return agent

    @property
    def nets(self) -> Dict[str, DenseNet]:
        return {"policy": self.policy.trunk, "value": self.value}

    def values(self, states: np.ndarray) -> np.ndarray:
        return self.value.forward(np.atleast_2d(states))[:, 0]


@dataclass
class PpoMinibatch:
    """
    Rollout slice used by one PPO gradient step.

    Attributes:
        states, actions, next_states: Transition data
        raw_actions: Pre-squash samples drawn during collection
        old_log_probs: log π_old of those samples
        returns: Value targets Â + V(s)
    """

    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    raw_actions: np.ndarray
    old_log_probs: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return int(self.states.shape[0])


def ppo_policy_loss(
    minibatch: PpoMinibatch,
    policy: SquashedGaussianPolicy,
    advantages: np.ndarray,
    clip_epsilon: float = 0.2,
) -> LossResult:
    """
    Clipped surrogate −mean[min(ρ Â, clip(ρ, 1 − ε, 1 + ε) Â)], ρ = π/π_old.

    Advantages are data: no gradient flows into them.
    """
    b = len(minibatch)
    if b == 0:
        raise ContractViolation("PPO loss of an empty minibatch")
    adv = np.asarray(advantages, dtype=np.float64).reshape(-1)
    if adv.shape != (b,):
        raise ContractViolation(f"Expected {b} advantages, got {adv.shape}")
    out = policy.log_prob_raw(minibatch.states, minibatch.raw_actions)
    ratio = np.exp(out.log_prob - minibatch.old_log_probs)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv
    objective = np.minimum(unclipped, clipped)
    value = -float(np.mean(objective))

    # the clipped branch is flat in ρ wherever it is selected over the unclipped one
    d_ratio = np.where(unclipped <= clipped, adv, 0.0)
    grad_log_prob = -d_ratio * ratio / b
    grads = policy.backward_log_prob_raw(out, grad_log_prob)
    clip_fraction = np.array(np.mean(np.abs(ratio - 1.0) > clip_epsilon))
    return LossResult(value, {"policy": grads}, {"ratio": ratio, "clip_fraction": clip_fraction})


def ppo_value_loss(states: np.ndarray, returns: np.ndarray, value: DenseNet) -> LossResult:
    """mean ½(V(s) − returns)²."""
    b = states.shape[0]
    if b == 0:
        raise ContractViolation("Value loss of an empty minibatch")
    pred, cache = value.forward_cached(states)
    err = pred[:, 0] - returns
    grads, _ = value.backward(states, (err / b)[:, None], cache)
    return LossResult(float(np.mean(0.5 * err * err)), {"value": grads})


def augmented_advantage(
    advantages: np.ndarray, lie_values: np.ndarray, beta: float, mu: float
) -> np.ndarray:
    """
    Â_β = Â + β · min(0, −(Lie + μ)).

    Unchanged where Lie ≤ −μ; lowered by β(Lie + μ) elsewhere.
    """
    adv = np.asarray(advantages, dtype=np.float64)
    if beta == 0.0:
        return adv
    return adv + beta * np.minimum(0.0, -(np.asarray(lie_values) + mu))


def lppo_policy_loss(
    minibatch: PpoMinibatch,
    policy: SquashedGaussianPolicy,
    advantages: np.ndarray,
    lyap: Optional[LyapunovFunction],
    beta: float,
    mu: float,
    clip_epsilon: float = 0.2,
) -> LossResult:
    """
    Clipped surrogate on Lyapunov-augmented advantages.

    Lie derivatives use the current policy mean at s' and enter the
    objective as constants. With β = 0 this is `ppo_policy_loss`.
    """
    if beta == 0.0 or lyap is None:
        return ppo_policy_loss(minibatch, policy, advantages, clip_epsilon)
    lie = lyap.lie_derivative(
        minibatch.states,
        None if lyap.state_only else minibatch.actions,
        minibatch.next_states,
        policy,
    )
    augmented = augmented_advantage(advantages, lie, beta, mu)
    loss = ppo_policy_loss(minibatch, policy, augmented, clip_epsilon)
    loss.aux["lie"] = lie
    loss.aux["advantages"] = augmented
    return loss
