"""
Soft actor-critic losses and agent.

The agent follows the value-network formulation: a state value V_ψ with a
polyak-averaged target V_ψ̄, an action value Q_θ (optionally twin heads),
and a squashed Gaussian policy π_φ with a fixed entropy temperature α.
Every loss returns a `LossResult` whose gradients are exact; the sampling
noise is an argument so that gradient checks can freeze it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from lyacert.algorithms.common import apply_gradients
from lyacert.buffers.transitions import TransitionBatch
from lyacert.core.errors import ContractViolation
from lyacert.envs.base import EnvSpec
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.models.run_config import RunConfig
from lyacert.nn.adam import AdamState
from lyacert.nn.dense import DenseGrads, DenseNet, mlp, polyak_update
from lyacert.nn.loss import LossResult
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


@dataclass
class SacAgent:
    """
    Networks and constants of a SAC-family learner.

    Attributes:
        policy: π_φ
        q: Q_θ on ``s ⧺ a``
        v: V_ψ
        v_target: V_ψ̄, same layer sizes as V_ψ
        q2: Second Q head when twin-Q is enabled
        alpha: Entropy temperature (>= 0)
        target_entropy: Entropy below which a debug diagnostic is logged
        gamma: Discount
        tau: Polyak rate in (0, 1]
    """

    policy: SquashedGaussianPolicy
    q: DenseNet
    v: DenseNet
    v_target: DenseNet
    q2: Optional[DenseNet] = None
    alpha: float = 0.2
    target_entropy: float = -1.0
    gamma: float = 0.99
    tau: float = 0.005
    optimizers: Dict[str, AdamState] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.v_target.same_architecture(self.v):
            raise ContractViolation("Target value network must mirror the value network")
        if not 0.0 < self.tau <= 1.0:
            raise ContractViolation(f"tau must be in (0, 1], got {self.tau}")
        if self.alpha < 0.0:
            raise ContractViolation(f"alpha must be >= 0, got {self.alpha}")

    @classmethod
    def create(cls, spec: EnvSpec, config: RunConfig, rng: np.random.Generator) -> "SacAgent":
        n, m = spec.state_dim, spec.action_dim
        hidden = config.hidden or [64, 64]
        policy = SquashedGaussianPolicy.for_box(
            n, spec.action_low, spec.action_high, hidden, rng, config.activation
        )
        q = mlp(n + m, hidden, 1, rng, config.activation)
        q2 = mlp(n + m, hidden, 1, rng, config.activation) if config.twin_q else None
        v = mlp(n, hidden, 1, rng, config.activation)
        agent = cls(
            policy=policy,
            q=q,
            v=v,
            v_target=v.copy(),
            q2=q2,
            alpha=config.alpha,
            target_entropy=(
                float(-m) if config.target_entropy is None else config.target_entropy
            ),
            gamma=config.gamma,
            tau=config.tau,
        )
        agent.optimizers = {
            "policy": AdamState.for_net(policy.trunk, config.lr_policy),
            "q": AdamState.for_net(q, config.lr_q),
            "v": AdamState.for_net(v, config.lr_value),
        }
        if q2 is not None:
            agent.optimizers["q2"] = AdamState.for_net(q2, config.lr_q)
        return agent

    @property
    def nets(self) -> Dict[str, DenseNet]:
        nets = {"policy": self.policy.trunk, "q": self.q, "v": self.v, "v_target": self.v_target}
        if self.q2 is not None:
            nets["q2"] = self.q2
        return nets

    def q_heads(self) -> Dict[str, DenseNet]:
        return {"q": self.q, "q2": self.q2} if self.q2 is not None else {"q": self.q}


def _sa(states: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.concatenate([states, actions], axis=1)


def _min_q(agent: SacAgent, inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Minimum over Q heads and the index of the selected head per row."""
    values = np.stack([net.forward(inputs)[:, 0] for net in agent.q_heads().values()])
    choice = np.argmin(values, axis=0)
    return values[choice, np.arange(values.shape[1])], choice


def _check(batch: TransitionBatch) -> int:
    if len(batch) == 0:
        raise ContractViolation("SAC loss of an empty batch")
    return len(batch)


def sac_q_loss(batch: TransitionBatch, agent: SacAgent) -> LossResult:
    """J_Q = mean ½(Q(s, a) − (r + γ(1 − done) V̄(s')))², summed over Q heads."""
    b = _check(batch)
    target = batch.rewards + agent.gamma * (1.0 - batch.dones) * agent.v_target.forward(
        batch.next_states
    )[:, 0]
    inputs = _sa(batch.states, batch.actions)
    value = 0.0
    grads: Dict[str, DenseGrads] = {}
    for name, net in agent.q_heads().items():
        pred, cache = net.forward_cached(inputs)
        err = pred[:, 0] - target
        value += float(np.mean(0.5 * err * err))
        grads[name], _ = net.backward(inputs, (err / b)[:, None], cache)
    return LossResult(value, grads, {"target": target})


def sac_v_loss(batch: TransitionBatch, agent: SacAgent, noise: np.ndarray) -> LossResult:
    """J_V = mean ½(V(s) − (Q(s, ã) − α log π(ã|s)))², ã drawn from π under `noise`."""
    b = _check(batch)
    out = agent.policy.sample(batch.states, noise)
    q_val, _ = _min_q(agent, _sa(batch.states, out.action))
    target = q_val - agent.alpha * out.log_prob
    pred, cache = agent.v.forward_cached(batch.states)
    err = pred[:, 0] - target
    grads, _ = agent.v.backward(batch.states, (err / b)[:, None], cache)
    return LossResult(float(np.mean(0.5 * err * err)), {"v": grads}, {"target": target})


def sac_value_losses(
    batch: TransitionBatch, agent: SacAgent, noise: np.ndarray
) -> Tuple[LossResult, LossResult]:
    """(J_V, J_Q) on one batch with the current networks."""
    return sac_v_loss(batch, agent, noise), sac_q_loss(batch, agent)


def sac_policy_loss(batch: TransitionBatch, agent: SacAgent, noise: np.ndarray) -> LossResult:
    """
    Minimized policy objective mean[α log π(ã|s) − Q(s, ã)].

    ã is the reparameterized sample for `noise`; the gradient flows through
    ã into φ, and through the Q input but not into the Q parameters.
    """
    b = _check(batch)
    out = agent.policy.sample(batch.states, noise)
    inputs = _sa(batch.states, out.action)
    q_val, choice = _min_q(agent, inputs)
    value = float(np.mean(agent.alpha * out.log_prob - q_val))

    n = batch.states.shape[1]
    grad_action = np.zeros_like(out.action)
    for head, net in enumerate(agent.q_heads().values()):
        rows = choice == head
        if not np.any(rows):
            continue
        cot = np.where(rows, -1.0 / b, 0.0)[:, None]
        _, input_grad = net.backward(inputs, cot)
        grad_action += input_grad[:, n:]
    grad_log_prob = np.full(b, agent.alpha / b)
    grads = agent.policy.backward_sample(out, grad_action, grad_log_prob)
    return LossResult(
        value,
        {"policy": grads},
        {"log_prob": out.log_prob, "q": q_val, "entropy": np.array(-np.mean(out.log_prob))},
    )


def lyapunov_penalty(
    batch: TransitionBatch,
    policy: SquashedGaussianPolicy,
    lyap: LyapunovFunction,
    beta: float,
    mu: float,
) -> LossResult:
    """
    β · mean max(0, Lie + μ) with its gradient w.r.t. the policy.

    The Lie derivative is (L(s', π(s')) − L(s, a)) / Δt; only the π(s')
    term depends on φ, so the gradient flows through the policy mean at s'.
    Transitions whose Lie derivative is at most −μ contribute nothing.
    """
    b = _check(batch)
    if lyap.state_only:
        raise ContractViolation("The off-policy penalty needs a state-action Lyapunov function")
    next_actions = policy.mean_action(batch.next_states)
    next_inputs = lyap.inputs(batch.next_states, next_actions)
    l_next, cache = lyap.net.forward_cached(next_inputs)
    l_now = lyap.value(batch.states, batch.actions)
    lie = (l_next[:, 0] - l_now) / lyap.dt
    hinge = np.maximum(0.0, lie + mu)
    value = beta * float(np.mean(hinge))

    active = (lie + mu > 0.0).astype(np.float64)
    cot = (beta * active / (lyap.dt * b))[:, None]
    _, input_grad = lyap.net.backward(next_inputs, cot, cache)
    grads = policy.backward_mean_action(batch.next_states, input_grad[:, lyap.state_dim:])
    return LossResult(value, {"policy": grads}, {"lie": lie, "active": active})


def lsac_policy_loss(
    batch: TransitionBatch,
    agent: SacAgent,
    lyap: Optional[LyapunovFunction],
    beta: float,
    mu: float,
    noise: np.ndarray,
) -> LossResult:
    """
    SAC policy loss plus β · mean max(0, Lie + μ).

    With β = 0 (or no Lyapunov function) this is `sac_policy_loss`, exactly.
    """
    base = sac_policy_loss(batch, agent, noise)
    if beta == 0.0 or lyap is None:
        return base
    penalty = lyapunov_penalty(batch, agent.policy, lyap, beta, mu)
    aux = dict(base.aux)
    aux.update(penalty.aux)
    aux["penalty"] = np.array(penalty.value)
    return LossResult(
        base.value + penalty.value,
        {"policy": base.grads["policy"] + penalty.grads["policy"]},
        aux,
    )


def sac_update(
    agent: SacAgent,
    batch: TransitionBatch,
    noise_rng: np.random.Generator,
    lyap: Optional[LyapunovFunction] = None,
    beta: float = 0.0,
    mu: float = 0.0,
) -> Dict[str, LossResult]:
    """
    One optimization step: V, then Q, then π, then the polyak target update.

    Each loss is evaluated with the networks as updated by the previous
    step. Sampling noise is drawn from `noise_rng`.

    Returns:
        Losses keyed ``value``, ``q`` and ``policy``
    """
    shape = (len(batch), agent.policy.action_dim)
    nets = agent.nets
    v_loss = sac_v_loss(batch, agent, noise_rng.standard_normal(shape))
    apply_gradients(nets, agent.optimizers, v_loss)
    q_loss = sac_q_loss(batch, agent)
    apply_gradients(nets, agent.optimizers, q_loss)
    pi_loss = lsac_policy_loss(batch, agent, lyap, beta, mu, noise_rng.standard_normal(shape))
    apply_gradients(nets, agent.optimizers, pi_loss)
    polyak_update(agent.v_target, agent.v, agent.tau)
    return {"value": v_loss, "q": q_loss, "policy": pi_loss}
