"""
Tanh-squashed Gaussian policy with reparameterized sampling.

The trunk maps a state to ``[mean, log_std]`` (2m outputs). Sampling draws
``u = mean + exp(log_std) * noise`` and squashes ``a = scale * tanh(u) + bias``;
the log-density carries the change-of-variables term of both the tanh and
the affine scale. Callers supply the standard-normal noise, so the same
noise can be frozen for gradient checks and replayed for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from lyacert.core.errors import ContractViolation
from lyacert.nn.dense import DenseGrads, DenseNet, ForwardCache

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG2 = np.log(2.0)
# keeps squashed actions strictly inside the open action interval
_SQUASH_LIMIT = 1.0 - 1e-12


def log_one_minus_tanh_sq(u: np.ndarray) -> np.ndarray:
    """Stable log(1 - tanh(u)^2)."""
    return 2.0 * (_LOG2 - u - np.logaddexp(0.0, -2.0 * u))


@dataclass
class PolicyOutput:
    """
    Everything a sample or density evaluation produced, kept for backward.

    Arrays are batched: actions/raw/noise ``(B, m)``, log_prob ``(B,)``.
    """

    states: np.ndarray
    mean: np.ndarray
    log_std: np.ndarray
    std: np.ndarray
    noise: np.ndarray
    raw: np.ndarray
    squashed: np.ndarray
    action: np.ndarray
    log_prob: np.ndarray
    in_bounds: np.ndarray
    cache: ForwardCache


class SquashedGaussianPolicy:
    """
    Stochastic policy pi(a|s) over a box action space.

    Args:
        trunk: DenseNet with output width 2 * action_dim
        action_scale: Per-dimension half-width of the action box
        action_bias: Per-dimension center of the action box
        log_std_bounds: Clamp applied to log_std before exponentiation
    """

    def __init__(
        self,
        trunk: DenseNet,
        action_scale: Sequence[float],
        action_bias: Sequence[float],
        log_std_bounds: Tuple[float, float] = (LOG_STD_MIN, LOG_STD_MAX),
    ) -> None:
        self.trunk = trunk
        self.action_scale = np.asarray(action_scale, dtype=np.float64).reshape(-1)
        self.action_bias = np.asarray(action_bias, dtype=np.float64).reshape(-1)
        self.log_std_bounds = (float(log_std_bounds[0]), float(log_std_bounds[1]))
        if trunk.output_size % 2 != 0:
            raise ContractViolation("Policy trunk output width must be 2 * action_dim")
        if self.action_scale.shape != (self.action_dim,) or self.action_bias.shape != (
            self.action_dim,
        ):
            raise ContractViolation("action_scale/action_bias must have length action_dim")
        if np.any(self.action_scale <= 0.0):
            raise ContractViolation("action_scale must be positive")
        if self.log_std_bounds[0] >= self.log_std_bounds[1]:
            raise ContractViolation(f"Invalid log_std bounds {self.log_std_bounds}")

    @classmethod
    def for_box(
        cls,
        state_dim: int,
        low: Sequence[float],
        high: Sequence[float],
        hidden: Sequence[int],
        rng: np.random.Generator,
        activation: str = "tanh",
    ) -> "SquashedGaussianPolicy":
        """Create a randomly initialized policy for the action box [low, high]."""
        low_arr = np.asarray(low, dtype=np.float64)
        high_arr = np.asarray(high, dtype=np.float64)
        trunk = DenseNet.initialize(
            [state_dim, *hidden, 2 * low_arr.size], rng, hidden_activation=activation
        )
        return cls(trunk, (high_arr - low_arr) / 2.0, (high_arr + low_arr) / 2.0)

    @property
    def action_dim(self) -> int:
        return self.trunk.output_size // 2

    @property
    def state_dim(self) -> int:
        return self.trunk.input_size

    def copy(self) -> "SquashedGaussianPolicy":
        return SquashedGaussianPolicy(
            self.trunk.copy(),
            self.action_scale.copy(),
            self.action_bias.copy(),
            self.log_std_bounds,
        )

    def _squash(self, raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.tanh(raw)
        return t, self.action_scale * np.clip(t, -_SQUASH_LIMIT, _SQUASH_LIMIT) + self.action_bias

    def _heads(self, states: np.ndarray) -> Tuple[np.ndarray, ...]:
        batch = np.atleast_2d(np.asarray(states, dtype=np.float64))
        out, cache = self.trunk.forward_cached(batch)
        m = self.action_dim
        mean = out[:, :m]
        raw_log_std = out[:, m:]
        low, high = self.log_std_bounds
        log_std = np.clip(raw_log_std, low, high)
        in_bounds = (raw_log_std > low) & (raw_log_std < high)
        return batch, mean, log_std, in_bounds, cache

    def _log_density(self, noise: np.ndarray, log_std: np.ndarray, raw: np.ndarray) -> np.ndarray:
        per_dim = (
            -0.5 * noise * noise
            - log_std
            - _HALF_LOG_2PI
            - np.log(self.action_scale)
            - log_one_minus_tanh_sq(raw)
        )
        return per_dim.sum(axis=1)

    def sample(self, states: np.ndarray, noise: np.ndarray) -> PolicyOutput:
        """
        Reparameterized sample a = scale * tanh(mean + std * noise) + bias.

        Args:
            states: ``(n,)`` or ``(B, n)``
            noise: Standard-normal draws, ``(m,)`` or ``(B, m)``

        Raises:
            ContractViolation: If the noise width is not the action dimension
        """
        batch, mean, log_std, in_bounds, cache = self._heads(states)
        eps = np.atleast_2d(np.asarray(noise, dtype=np.float64))
        if eps.shape != mean.shape:
            raise ContractViolation(f"Noise shape {np.shape(noise)} does not match {mean.shape}")
        std = np.exp(log_std)
        raw = mean + std * eps
        t, action = self._squash(raw)
        log_prob = self._log_density(eps, log_std, raw)
        return PolicyOutput(
            batch, mean, log_std, std, eps, raw, t, action, log_prob, in_bounds, cache
        )

    def log_prob_raw(self, states: np.ndarray, raw: np.ndarray) -> PolicyOutput:
        """
        Log-density of previously drawn pre-squash samples under the current parameters.

        Working from the stored pre-squash value avoids an atanh of actions
        that sit numerically on the box boundary.
        """
        batch, mean, log_std, in_bounds, cache = self._heads(states)
        raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
        if raw.shape != mean.shape:
            raise ContractViolation(f"Raw sample shape {raw.shape} does not match {mean.shape}")
        std = np.exp(log_std)
        eps = (raw - mean) / std
        t, action = self._squash(raw)
        log_prob = self._log_density(eps, log_std, raw)
        return PolicyOutput(
            batch, mean, log_std, std, eps, raw, t, action, log_prob, in_bounds, cache
        )

    def mean_action(self, states: np.ndarray) -> np.ndarray:
        """
        Deterministic squashed mean, scale * tanh(mean) + bias.

        Returns a vector for a single state and ``(B, m)`` for a batch.
        """
        single = np.asarray(states).ndim == 1
        batch, mean, _, _, _ = self._heads(states)
        _, action = self._squash(mean)
        return action[0] if single else action

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return self.mean_action(states)

    def backward_sample(
        self,
        out: PolicyOutput,
        grad_action: Optional[np.ndarray] = None,
        grad_log_prob: Optional[np.ndarray] = None,
    ) -> DenseGrads:
        """
        Gradient of a loss through a reparameterized sample, noise held fixed.

        Args:
            out: Result of `sample`
            grad_action: dLoss/da, ``(B, m)``
            grad_log_prob: dLoss/dlog_prob, ``(B,)``
        """
        g_a = np.zeros_like(out.action) if grad_action is None else np.atleast_2d(grad_action)
        g_lp = np.zeros(out.action.shape[0]) if grad_log_prob is None else np.asarray(grad_log_prob)
        g_lp = g_lp.reshape(-1, 1)
        # d log_prob / d raw = 2 tanh(raw); d a / d raw = scale (1 - tanh^2)
        g_raw = g_a * self.action_scale * (1.0 - out.squashed**2) + g_lp * 2.0 * out.squashed
        g_mean = g_raw
        g_log_std = (g_raw * out.std * out.noise - g_lp) * out.in_bounds
        return self._trunk_backward(out, g_mean, g_log_std)

    def backward_log_prob_raw(self, out: PolicyOutput, grad_log_prob: np.ndarray) -> DenseGrads:
        """Gradient of a loss through `log_prob_raw`, raw samples held fixed."""
        g_lp = np.asarray(grad_log_prob, dtype=np.float64).reshape(-1, 1)
        g_mean = g_lp * out.noise / out.std
        g_log_std = g_lp * (out.noise**2 - 1.0) * out.in_bounds
        return self._trunk_backward(out, g_mean, g_log_std)

    def backward_mean_action(self, states: np.ndarray, grad_action: np.ndarray) -> DenseGrads:
        """Gradient of a loss through `mean_action`."""
        batch, mean, log_std, _, cache = self._heads(states)
        g_a = np.atleast_2d(np.asarray(grad_action, dtype=np.float64))
        t = np.tanh(mean)
        g_mean = g_a * self.action_scale * (1.0 - t * t)
        cot = np.concatenate([g_mean, np.zeros_like(log_std)], axis=1)
        grads, _ = self.trunk.backward(batch, cot, cache)
        return grads

    def _trunk_backward(
        self, out: PolicyOutput, g_mean: np.ndarray, g_log_std: np.ndarray
    ) -> DenseGrads:
        cot = np.concatenate([g_mean, g_log_std], axis=1)
        grads, _ = self.trunk.backward(out.states, cot, out.cache)
        return grads
