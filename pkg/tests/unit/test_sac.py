"""Tests for the SAC and LSAC losses."""

import numpy as np
import pytest

from lyacert.algorithms.sac import (
    SacAgent,
    lsac_policy_loss,
    lyapunov_penalty,
    sac_policy_loss,
    sac_q_loss,
    sac_update,
    sac_v_loss,
    sac_value_losses,
)
from lyacert.buffers.transitions import TransitionBatch
from lyacert.core.errors import ContractViolation
from lyacert.envs.pendulum import PendulumEnv
from lyacert.models.run_config import RunConfig
from lyacert.nn.adam import AdamState
from lyacert.nn.dense import DenseNet, mlp
from tests.helpers import GRAD_SEEDS, linear_lyapunov, make_batch, make_lyapunov, make_policy


def make_agent(rng, twin=False, alpha=0.2, zero_critics=False) -> SacAgent:
    policy = make_policy(rng)
    if zero_critics:
        q, v = DenseNet.zeros([4, 8, 1]), DenseNet.zeros([3, 8, 1])
    else:
        q, v = mlp(4, [8], 1, rng), mlp(3, [8], 1, rng)
    agent = SacAgent(
        policy=policy,
        q=q,
        v=v,
        v_target=mlp(3, [8], 1, rng) if not zero_critics else v.copy(),
        q2=mlp(4, [8], 1, rng) if twin else None,
        alpha=alpha,
        gamma=0.9,
        tau=0.1,
    )
    agent.optimizers = {name: AdamState.for_net(net, 1e-3) for name, net in agent.nets.items()}
    return agent


class TestSacAgent:
    """Test SacAgent class."""

    def test_create_from_config(self, rng):
        """Test agent construction from a run configuration."""
        config = RunConfig(algo="sac", env="pendulum", hidden=[8, 8], twin_q=True)
        agent = SacAgent.create(PendulumEnv().spec, config, rng)
        assert agent.q.layer_sizes == [4, 8, 8, 1]
        assert agent.q2 is not None
        assert np.array_equal(agent.v_target.flat_parameters(), agent.v.flat_parameters())
        assert agent.target_entropy == -1.0
        assert set(agent.optimizers) == {"policy", "q", "q2", "v"}

    def test_invariants(self, rng):
        """Test validation of tau, alpha and the target network."""
        agent = make_agent(rng)
        with pytest.raises(ContractViolation):
            SacAgent(agent.policy, agent.q, agent.v, mlp(3, [4], 1, rng))
        with pytest.raises(ContractViolation):
            SacAgent(agent.policy, agent.q, agent.v, agent.v.copy(), tau=0.0)
        with pytest.raises(ContractViolation):
            SacAgent(agent.policy, agent.q, agent.v, agent.v.copy(), alpha=-1.0)


class TestSacValueLosses:
    """Test sac_q_loss and sac_v_loss."""

    def test_zero_critics_and_rewards(self, rng):
        """Test that J_Q vanishes for Q ≡ 0, r = 0, V̄ ≡ 0."""
        agent = make_agent(rng, zero_critics=True)
        batch = make_batch(rng)
        batch.rewards[:] = 0.0
        assert sac_q_loss(batch, agent).value == 0.0

    def test_terminal_target_is_reward(self, rng):
        """Test that done transitions do not bootstrap."""
        agent = make_agent(rng)
        batch = make_batch(rng)
        batch.dones[:] = 1.0
        target = sac_q_loss(batch, agent).aux["target"]
        assert np.array_equal(target, batch.rewards)

    def test_value_losses_pair(self, rng):
        """Test that sac_value_losses returns (J_V, J_Q)."""
        agent = make_agent(rng)
        batch = make_batch(rng)
        noise = rng.standard_normal((len(batch), 1))
        j_v, j_q = sac_value_losses(batch, agent, noise)
        assert j_v.value == sac_v_loss(batch, agent, noise).value
        assert j_q.value == sac_q_loss(batch, agent).value
        assert set(j_v.grads) == {"v"} and set(j_q.grads) == {"q"}

    @pytest.mark.parametrize("seed", GRAD_SEEDS)
    def test_q_gradient(self, seed, grad_check):
        """Test ∇θ J_Q against central differences for both twin heads."""
        rng = np.random.default_rng(seed)
        agent = make_agent(rng, twin=True)
        batch = make_batch(rng, size=8)
        loss = sac_q_loss(batch, agent)
        for name in ("q", "q2"):
            net = getattr(agent, name)
            assert grad_check(lambda: sac_q_loss(batch, agent).value, net, loss.grads[name]) <= 1e-4

    @pytest.mark.parametrize("seed", GRAD_SEEDS)
    def test_v_gradient(self, seed, grad_check):
        """Test ∇ψ J_V against central differences with frozen noise."""
        rng = np.random.default_rng(seed)
        agent = make_agent(rng)
        batch = make_batch(rng, size=8)
        noise = rng.standard_normal((8, 1))
        loss = sac_v_loss(batch, agent, noise)
        check = grad_check(lambda: sac_v_loss(batch, agent, noise).value, agent.v, loss.grads["v"])
        assert check <= 1e-4

    def test_empty_batch(self, rng):
        """Test that an empty batch is rejected."""
        empty = make_batch(rng).subset(np.array([], dtype=int))
        with pytest.raises(ContractViolation):
            sac_q_loss(empty, make_agent(rng))


class TestSacPolicyLoss:
    """Test sac_policy_loss."""

    def test_no_entropy_no_critic(self, rng):
        """Test that α = 0 and Q ≡ 0 give a zero loss."""
        agent = make_agent(rng, alpha=0.0, zero_critics=True)
        batch = make_batch(rng)
        loss = sac_policy_loss(batch, agent, rng.standard_normal((len(batch), 1)))
        assert loss.value == 0.0

    def test_no_entropy_is_negative_q(self, rng):
        """Test that with α = 0 the loss is −mean Q(s, ã)."""
        agent = make_agent(rng, alpha=0.0)
        batch = make_batch(rng)
        noise = rng.standard_normal((len(batch), 1))
        loss = sac_policy_loss(batch, agent, noise)
        assert loss.value == pytest.approx(-float(np.mean(loss.aux["q"])), abs=1e-12)

    @pytest.mark.parametrize("seed", GRAD_SEEDS)
    def test_policy_gradient(self, seed, grad_check):
        """Test ∇φ through the reparameterized sample with frozen noise."""
        rng = np.random.default_rng(seed)
        agent = make_agent(rng)
        batch = make_batch(rng, size=8)
        noise = rng.standard_normal((8, 1))
        loss = sac_policy_loss(batch, agent, noise)
        check = grad_check(
            lambda: sac_policy_loss(batch, agent, noise).value,
            agent.policy.trunk,
            loss.grads["policy"],
        )
        assert check <= 1e-4


class TestLyapunovPenalty:
    """Test lyapunov_penalty and lsac_policy_loss."""

    def test_beta_zero_is_sac(self, rng):
        """Test that β = 0 reproduces the SAC policy loss exactly."""
        agent = make_agent(rng)
        batch = make_batch(rng)
        noise = rng.standard_normal((len(batch), 1))
        base = sac_policy_loss(batch, agent, noise)
        lsac = lsac_policy_loss(batch, agent, make_lyapunov(rng), 0.0, 0.1, noise)
        assert lsac.value == base.value
        assert np.array_equal(lsac.grads["policy"].flat(), base.grads["policy"].flat())

    def test_inactive_hinge_contributes_nothing(self, rng):
        """Test that transitions with Lie derivative ≤ −μ leave the objective unchanged."""
        agent = make_agent(rng)
        states = rng.uniform(1.0, 2.0, size=(10, 3))
        actions = rng.uniform(-1.0, 1.0, (10, 1))
        batch = TransitionBatch(states, actions, np.zeros(10), 0.5 * states, np.zeros(10))
        lyap = linear_lyapunov([1.0, 1.0, 1.0], [0.01], dt=0.05)
        penalty = lyapunov_penalty(batch, agent.policy, lyap, beta=2.0, mu=0.1)
        assert penalty.value == 0.0
        assert np.all(penalty.aux["lie"] <= -0.1)
        assert not np.any(penalty.grads["policy"].flat())

        noise = rng.standard_normal((10, 1))
        lsac = lsac_policy_loss(batch, agent, lyap, 2.0, 0.1, noise)
        assert lsac.value == sac_policy_loss(batch, agent, noise).value

    def test_penalty_value(self, rng):
        """Test β · mean max(0, Lie + μ) against the candidate's own Lie derivative."""
        agent = make_agent(rng)
        batch = make_batch(rng)
        lyap = make_lyapunov(rng)
        penalty = lyapunov_penalty(batch, agent.policy, lyap, beta=0.5, mu=0.2)
        lie = lyap.lie_derivative(batch.states, batch.actions, batch.next_states, agent.policy)
        assert penalty.value == pytest.approx(0.5 * np.mean(np.maximum(0.0, lie + 0.2)), abs=1e-12)

    @pytest.mark.parametrize("seed", GRAD_SEEDS)
    def test_penalty_gradient(self, seed, grad_check):
        """Test ∇φ of the penalty through π(s′) against central differences."""
        rng = np.random.default_rng(seed)
        agent = make_agent(rng)
        batch = make_batch(rng, size=8)
        lyap = make_lyapunov(rng)
        penalty = lyapunov_penalty(batch, agent.policy, lyap, 1.5, 0.05)
        check = grad_check(
            lambda: lyapunov_penalty(batch, agent.policy, lyap, 1.5, 0.05).value,
            agent.policy.trunk,
            penalty.grads["policy"],
        )
        assert check <= 1e-4

    def test_state_only_candidate_rejected(self, rng):
        """Test that the off-policy penalty needs a state-action candidate."""
        with pytest.raises(ContractViolation):
            lyap = make_lyapunov(rng, action_dim=0)
            lyapunov_penalty(make_batch(rng), make_policy(rng), lyap, 1.0, 0.1)


class TestSacUpdate:
    """Test sac_update."""

    def test_one_update(self, rng):
        """Test that one update steps every optimizer once and moves the target."""
        agent = make_agent(rng)
        target_before = agent.v_target.flat_parameters()
        losses = sac_update(agent, make_batch(rng), np.random.default_rng(0))

        assert set(losses) == {"value", "q", "policy"}
        assert all(agent.optimizers[name].step_count == 1 for name in ("policy", "q", "v"))
        expected = 0.1 * agent.v.flat_parameters() + 0.9 * target_before
        assert np.allclose(agent.v_target.flat_parameters(), expected, atol=1e-15)
