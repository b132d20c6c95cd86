"""Tests for the PPO and LPPO losses."""

import numpy as np
import pytest

from lyacert.algorithms.ppo import (
    PpoAgent,
    PpoMinibatch,
    augmented_advantage,
    lppo_policy_loss,
    ppo_policy_loss,
    ppo_value_loss,
)
from lyacert.core.errors import ContractViolation
from lyacert.envs.pendulum import PendulumEnv
from lyacert.models.run_config import RunConfig
from lyacert.nn.dense import mlp
from tests.helpers import GRAD_SEEDS, linear_lyapunov, make_lyapunov, make_policy


def make_minibatch(rng, policy, size=8, log_ratio=None) -> PpoMinibatch:
    """Minibatch of fresh samples whose old log-probs differ from π by log_ratio."""
    states = rng.normal(size=(size, 3))
    out = policy.sample(states, rng.standard_normal((size, 1)))
    shift = np.zeros(size) if log_ratio is None else np.broadcast_to(log_ratio, (size,))
    return PpoMinibatch(
        states=states,
        actions=out.action,
        next_states=rng.normal(size=(size, 3)),
        raw_actions=out.raw,
        old_log_probs=out.log_prob - shift,
        returns=rng.normal(size=size),
    )


class TestPpoAgent:
    """Test PpoAgent class."""

    def test_create_from_config(self, rng):
        """Test agent construction and value evaluation."""
        config = RunConfig(algo="ppo", env="pendulum", hidden=[8])
        agent = PpoAgent.create(PendulumEnv().spec, config, rng)
        assert agent.value.layer_sizes == [3, 8, 1]
        assert agent.values(np.zeros(3)).shape == (1,)
        assert set(agent.nets) == {"policy", "value"}

    def test_clip_range(self, rng):
        """Test that ε must lie in (0, 1)."""
        with pytest.raises(ContractViolation):
            PpoAgent(make_policy(rng), mlp(3, [4], 1, rng), clip_epsilon=1.0)


class TestPpoPolicyLoss:
    """Test ppo_policy_loss."""

    def test_unit_ratio(self, rng):
        """Test that π = π_old gives ρ = 1 and loss −mean Â."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy)
        adv = rng.normal(size=len(mb))
        loss = ppo_policy_loss(mb, policy, adv)
        assert np.allclose(loss.aux["ratio"], 1.0, atol=1e-12)
        assert loss.value == pytest.approx(-adv.mean(), abs=1e-12)

    def test_zero_advantage(self, rng):
        """Test that Â = 0 gives zero loss and zero gradient."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, log_ratio=0.3)
        loss = ppo_policy_loss(mb, policy, np.zeros(len(mb)))
        assert loss.value == 0.0
        assert not np.any(loss.grads["policy"].flat())

    @pytest.mark.parametrize("log_ratio", [np.log(1.5), np.log(0.6), np.log(1.1)])
    def test_matches_branch_free_oracle(self, rng, log_ratio):
        """Test the clipped objective against min of both terms evaluated separately."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, log_ratio=log_ratio)
        adv = rng.normal(size=len(mb))
        loss = ppo_policy_loss(mb, policy, adv, clip_epsilon=0.2)

        rho = np.exp(log_ratio)
        first = rho * adv
        second = np.clip(rho, 0.8, 1.2) * adv
        assert loss.value == pytest.approx(-np.mean(np.minimum(first, second)), abs=1e-9)

    def test_clipped_value_for_positive_advantage(self, rng):
        """Test that ρ above the band with Â > 0 uses (1 + ε) Â."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, log_ratio=np.log(1.5))
        loss = ppo_policy_loss(mb, policy, np.ones(len(mb)), clip_epsilon=0.2)
        assert loss.value == pytest.approx(-1.2, abs=1e-9)
        assert loss.aux["clip_fraction"] == 1.0
        assert not np.any(loss.grads["policy"].flat())

    def test_single_transition_hand_value(self, rng):
        """Test ρ = 0.7, Â = −2, ε = 0.2: min(−1.4, −1.6) = −1.6, so loss 1.6."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, size=1, log_ratio=np.log(0.7))
        loss = ppo_policy_loss(mb, policy, np.array([-2.0]), clip_epsilon=0.2)
        assert loss.value == pytest.approx(1.6, abs=1e-9)

    @pytest.mark.parametrize("seed", GRAD_SEEDS)
    def test_gradient(self, seed, grad_check):
        """Test ∇φ of the clipped surrogate against central differences."""
        rng = np.random.default_rng(seed)
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, log_ratio=rng.normal(scale=0.05, size=8))
        adv = rng.normal(size=8)
        loss = ppo_policy_loss(mb, policy, adv)
        check = grad_check(
            lambda: ppo_policy_loss(mb, policy, adv).value, policy.trunk, loss.grads["policy"]
        )
        assert check <= 1e-4

    def test_validation(self, rng):
        """Test advantage length and empty minibatch checks."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy)
        with pytest.raises(ContractViolation):
            ppo_policy_loss(mb, policy, np.zeros(3))
        with pytest.raises(ContractViolation):
            ppo_value_loss(np.zeros((0, 3)), np.zeros(0), mlp(3, [4], 1, rng))


class TestPpoValueLoss:
    """Test ppo_value_loss."""

    @pytest.mark.parametrize("seed", GRAD_SEEDS[:5])
    def test_gradient(self, seed, grad_check):
        """Test ∇θ of the value regression against central differences."""
        rng = np.random.default_rng(seed)
        value = mlp(3, [8], 1, rng)
        states = rng.normal(size=(8, 3))
        returns = rng.normal(size=8)
        loss = ppo_value_loss(states, returns, value)
        check = grad_check(
            lambda: ppo_value_loss(states, returns, value).value, value, loss.grads["value"]
        )
        assert check <= 1e-4


class TestAugmentedAdvantage:
    """Test augmented_advantage."""

    def test_inactive_hinge(self):
        """Test that Lie = −μ − 1 leaves Â unchanged."""
        adv = np.array([0.5, -1.0])
        assert np.array_equal(augmented_advantage(adv, np.array([-1.1, -1.1]), 0.7, 0.1), adv)

    def test_active_hinge(self):
        """Test Lie + μ = 2 with β = 0.5 lowers Â by 1."""
        out = augmented_advantage(np.array([3.0]), np.array([1.9]), 0.5, 0.1)
        assert out[0] == pytest.approx(2.0, abs=1e-12)

    def test_zero_temperature(self, rng):
        """Test that β = 0 returns Â for any Lie values."""
        adv = rng.normal(size=5)
        assert np.array_equal(augmented_advantage(adv, rng.normal(size=5) * 100, 0.0, 0.1), adv)


class TestLppoPolicyLoss:
    """Test lppo_policy_loss."""

    def test_beta_zero_is_ppo(self, rng):
        """Test that β = 0 is the plain clipped surrogate."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy, log_ratio=0.1)
        adv = rng.normal(size=len(mb))
        a = lppo_policy_loss(mb, policy, adv, make_lyapunov(rng), 0.0, 0.1)
        b = ppo_policy_loss(mb, policy, adv)
        assert a.value == b.value
        assert np.array_equal(a.grads["policy"].flat(), b.grads["policy"].flat())

    def test_decreasing_candidate_is_ppo(self, rng):
        """Test that Lie ≤ −μ everywhere leaves the surrogate unchanged."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy)
        mb.states[:] = np.abs(mb.states) + 1.0
        mb.next_states[:] = 0.5 * mb.states
        adv = rng.normal(size=len(mb))
        lyap = linear_lyapunov([1.0, 1.0, 1.0], [0.01], dt=0.05)
        a = lppo_policy_loss(mb, policy, adv, lyap, 1.0, 0.1)
        assert a.value == ppo_policy_loss(mb, policy, adv).value
        assert np.array_equal(a.aux["advantages"], adv)

    def test_uses_augmented_advantages(self, rng):
        """Test that the surrogate is evaluated on Â_β."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy)
        adv = rng.normal(size=len(mb))
        lyap = make_lyapunov(rng)
        loss = lppo_policy_loss(mb, policy, adv, lyap, 0.5, 0.2)
        lie = lyap.lie_derivative(mb.states, mb.actions, mb.next_states, policy)
        expected = augmented_advantage(adv, lie, 0.5, 0.2)
        assert np.allclose(loss.aux["advantages"], expected)
        assert loss.value == pytest.approx(-expected.mean(), abs=1e-12)

    def test_state_only_candidate(self, rng):
        """Test the on-policy-risk variant with a state-only candidate."""
        policy = make_policy(rng)
        mb = make_minibatch(rng, policy)
        lyap = make_lyapunov(rng, action_dim=0)
        loss = lppo_policy_loss(mb, policy, np.zeros(len(mb)), lyap, 1.0, 0.0)
        lie = (lyap.value(mb.next_states) - lyap.value(mb.states)) / lyap.dt
        assert np.allclose(loss.aux["lie"], lie)
