"""
Lyapunov risks.

All risks share one recipe::

    mean_B[ max(0, −L(s, a)) + max(0, Lie + μ) ] + L(s_G, π(s_G))²

with the goal term added once, outside the batch mean. The training risk
uses the configured μ, the certification risk uses μ = 0 through the
very same code path, and the on-policy risk applies the recipe to a
state-only candidate L(s). The policy is a constant in every risk:
gradients reach the Lyapunov network only.
"""

from __future__ import annotations

import logging
from typing import Optional, Union

import numpy as np

from lyacert.buffers.transitions import TransitionBatch
from lyacert.core.errors import ContractViolation
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.nn.loss import LossResult
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


def _hinge_risk(
    lyap: LyapunovFunction,
    now_inputs: np.ndarray,
    next_inputs: np.ndarray,
    goal_inputs: np.ndarray,
    mu: float,
    with_grad: bool,
) -> LossResult:
    net = lyap.net
    batch_size = now_inputs.shape[0]
    if batch_size == 0:
        raise ContractViolation("Lyapunov risk of an empty batch")

    l_now, cache_now = net.forward_cached(now_inputs)
    l_next, cache_next = net.forward_cached(next_inputs)
    l_goal, cache_goal = net.forward_cached(goal_inputs)
    l_now = l_now[:, 0]
    l_next = l_next[:, 0]
    g = float(l_goal[0, 0])

    lie = (l_next - l_now) / lyap.dt
    positivity = np.maximum(0.0, -l_now)
    decrease = np.maximum(0.0, lie + mu)
    value = float(np.mean(positivity + decrease)) + g * g

    aux = {"lie": lie, "l_now": l_now, "positivity": positivity, "decrease": decrease}
    if not with_grad:
        return LossResult(value, aux=aux)

    active = (lie + mu > 0.0).astype(np.float64)
    negative = (l_now < 0.0).astype(np.float64)
    cot_now = (-negative - active / lyap.dt) / batch_size
    cot_next = (active / lyap.dt) / batch_size
    grads_now, _ = net.backward(now_inputs, cot_now[:, None], cache_now)
    grads_next, _ = net.backward(next_inputs, cot_next[:, None], cache_next)
    grads_goal, _ = net.backward(goal_inputs, np.array([[2.0 * g]]), cache_goal)
    return LossResult(value, {"lyapunov": grads_now + grads_next + grads_goal}, aux)


def _policy_inputs(
    lyap: LyapunovFunction, states: np.ndarray, policy: SquashedGaussianPolicy
) -> np.ndarray:
    if lyap.state_only:
        return lyap.inputs(states)
    return lyap.inputs(states, policy.mean_action(np.atleast_2d(states)))


def training_risk(
    batch: TransitionBatch,
    lyap: LyapunovFunction,
    policy: SquashedGaussianPolicy,
    mu: Optional[float] = None,
    with_grad: bool = True,
) -> LossResult:
    """
    Practical Lyapunov risk with minimum decrease rate μ.

    Args:
        batch: Transitions (s, a, r, s', done), possibly off-policy
        lyap: State-action Lyapunov candidate
        policy: Current policy; π(s') and π(s_G) use its mean action
        mu: Overrides ``lyap.mu`` when given
        with_grad: Skip the backward passes when False

    Returns:
        LossResult with ``grads["lyapunov"]`` and the per-transition Lie
        derivatives in ``aux["lie"]``

    Raises:
        ContractViolation: If the batch is empty
    """
    if len(batch) == 0:
        raise ContractViolation("Lyapunov risk of an empty batch")
    rate = lyap.mu if mu is None else float(mu)
    return _hinge_risk(
        lyap,
        lyap.inputs(batch.states, batch.actions),
        _policy_inputs(lyap, batch.next_states, policy),
        _policy_inputs(lyap, lyap.goal[None, :], policy),
        rate,
        with_grad,
    )


def certification_risk(
    batch: TransitionBatch,
    lyap: LyapunovFunction,
    policy: SquashedGaussianPolicy,
    with_grad: bool = False,
) -> LossResult:
    """
    Lyapunov risk without the decrease margin (μ = 0).

    A certificate is found when this converges to zero on fresh data.
    """
    return training_risk(batch, lyap, policy, mu=0.0, with_grad=with_grad)


def on_policy_risk(
    batch: TransitionBatch,
    lyap: LyapunovFunction,
    mu: float = 0.0,
    with_grad: bool = True,
) -> LossResult:
    """
    State-only Lyapunov risk on on-policy transitions.

    max(0, −L(s)) + max(0, (L(s') − L(s))/Δt + μ), batch-averaged, plus
    L(s_G)². The Lie derivative is the plain finite difference along the
    recorded trajectory, so the data must come from the current policy.

    Raises:
        ContractViolation: If the candidate is not state-only or the batch is empty
    """
    if not lyap.state_only:
        raise ContractViolation("on_policy_risk needs a state-only Lyapunov function")
    if len(batch) == 0:
        raise ContractViolation("Lyapunov risk of an empty batch")
    return _hinge_risk(
        lyap,
        lyap.inputs(batch.states),
        lyap.inputs(batch.next_states),
        lyap.inputs(lyap.goal[None, :]),
        float(mu),
        with_grad,
    )


def state_lyapunov(
    lyap: LyapunovFunction,
    policy: SquashedGaussianPolicy,
    states: np.ndarray,
    n_samples: int = 16,
    rng: Optional[np.random.Generator] = None,
) -> Union[float, np.ndarray]:
    """
    Monte-Carlo estimate of L(s) = E_{a∼π(·|s)} L(s, a).

    Used for analysis and level sets only. A single state gives a float,
    a batch gives a ``(B,)`` array.
    """
    if n_samples <= 0:
        raise ContractViolation(f"n_samples must be positive, got {n_samples}")
    single = np.asarray(states).ndim == 1
    s = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if lyap.state_only:
        values = lyap.value(s)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        b = s.shape[0]
        repeated = np.repeat(s, n_samples, axis=0)
        noise = rng.standard_normal((b * n_samples, policy.action_dim))
        actions = policy.sample(repeated, noise).action
        values = lyap.value(repeated, actions).reshape(b, n_samples).mean(axis=1)
    return float(values[0]) if single else values
