"""End-to-end tests of the SAC-family and PPO-family training loops."""

import numpy as np
import pytest

import lyacert.algorithms.sac as sac_module
from lyacert.algorithms import (
    LppoTrainer,
    LsacTrainer,
    build_env,
    train_lppo,
    train_lsac,
    trainers,
)
from lyacert.cert import collect_transitions
from lyacert.core.errors import NumericalAbort
from lyacert.lyapunov.risk import training_risk
from lyacert.models.run_config import RunConfig
from lyacert.nn.adam import AdamState, adam_step
from lyacert.nn.loss import LossResult
from tests.helpers import make_lyapunov, make_policy


def tiny_config(algo: str, **overrides) -> RunConfig:
    values = dict(
        algo=algo,
        env="pendulum",
        seed=7,
        steps=120,
        hidden=[8, 8],
        episode_length=20,
        warmup_steps=20,
        batch_size=16,
        lyapunov_batch_size=16,
        log_interval=20,
        rollout_steps=40,
        epochs=2,
        minibatch_size=10,
        checkpoint_interval=0,
    )
    values.update(overrides)
    return RunConfig(**values)


def run(config: RunConfig):
    trainer = trainers.create(config.algo, build_env(config), config)
    return trainer, trainer.run()


def update_column(report, name):
    return [getattr(row, name) for row in report.update_rows]


class TestZeroSteps:
    """Test runs with a zero step budget."""

    @pytest.mark.parametrize("algo", ["sac", "lsac", "ppo", "lppo", "lppo-onpolicy-risk"])
    def test_nothing_happens(self, algo):
        """Test that K = 0 gives an empty report and untouched networks."""
        config = tiny_config(algo, steps=0)
        trainer = trainers.create(algo, build_env(config), config)
        before = {name: net.flat_parameters() for name, net in trainer.agent.nets.items()}

        report = trainer.run()
        assert len(report) == 0
        assert report.final_return() is None
        for name, net in trainer.agent.nets.items():
            np.testing.assert_array_equal(net.flat_parameters(), before[name])


class TestOffPolicy:
    """Test the SAC/LSAC loop."""

    def test_report_contents(self):
        """Test episode and update rows of an LSAC run."""
        _, report = run(tiny_config("lsac"))
        assert [row.step for row in report.episode_rows] == [20, 40, 60, 80, 100, 120]
        # log points at 20, 40, ... once updates have started
        assert [row.step for row in report.update_rows] == [20, 40, 60, 80, 100, 120]
        row = report.update_rows[-1]
        assert row.lyapunov_risk is not None and row.lyapunov_risk >= 0.0
        assert row.certification_risk is not None
        assert 0.0 <= row.violation_fraction <= 1.0

    def test_plain_sac_has_no_lyapunov_columns(self):
        """Test that SAC leaves the Lyapunov columns empty."""
        trainer, report = run(tiny_config("sac"))
        assert trainer.lyapunov is None
        assert all(row.lyapunov_risk is None for row in report.update_rows)
        assert "lyapunov" not in trainer.checkpoint().nets

    def test_deterministic(self):
        """Test that the same seed reproduces the same run."""
        first_trainer, first = run(tiny_config("lsac"))
        second_trainer, second = run(tiny_config("lsac"))
        assert first.rows == second.rows
        np.testing.assert_array_equal(
            first_trainer.agent.policy.trunk.flat_parameters(),
            second_trainer.agent.policy.trunk.flat_parameters(),
        )

    def test_zero_beta_matches_sac(self):
        """Test that LSAC with β = 0 trains exactly like SAC over 1k steps."""
        lsac_trainer, lsac = run(tiny_config("lsac", beta=0.0, steps=1000))
        sac_trainer, sac = run(tiny_config("sac", steps=1000))

        assert lsac.episode_returns() == sac.episode_returns()
        assert update_column(lsac, "policy_loss") == update_column(sac, "policy_loss")
        for name, net in sac_trainer.agent.nets.items():
            np.testing.assert_array_equal(
                lsac_trainer.agent.nets[name].flat_parameters(), net.flat_parameters()
            )

    def test_numerical_abort_keeps_partial_report(self, monkeypatch):
        """Test that a NaN loss aborts with the report collected so far."""
        real_q_loss = sac_module.sac_q_loss
        calls = {"n": 0}

        def flaky_q_loss(batch, agent):
            calls["n"] += 1
            if calls["n"] > 30:
                return LossResult(float("nan"))
            return real_q_loss(batch, agent)

        monkeypatch.setattr(sac_module, "sac_q_loss", flaky_q_loss)
        config = tiny_config("lsac")
        trainer = LsacTrainer(build_env(config), config)
        with pytest.raises(NumericalAbort) as info:
            trainer.run()

        # warm-up ends at step 20, so the 31st update happens at step 50
        assert info.value.step == 50
        assert [row.step for row in info.value.report.episode_rows] == [20, 40]

    def test_checkpoint_callback(self):
        """Test checkpoints at every interval boundary."""
        seen = []
        config = tiny_config("lsac", steps=60, checkpoint_interval=25)
        trainer = LsacTrainer(
            build_env(config), config, on_checkpoint=lambda step, ckpt: seen.append((step, ckpt))
        )
        trainer.run()

        assert [step for step, _ in seen] == [25, 50]
        ckpt = seen[-1][1]
        assert ckpt.meta["step"] == 50
        assert {"policy", "q", "v", "v_target", "lyapunov"} <= set(ckpt.nets)


class TestOnPolicy:
    """Test the PPO/LPPO loop."""

    def test_report_contents(self):
        """Test one update row per rollout."""
        _, report = run(tiny_config("lppo"))
        assert [row.step for row in report.update_rows] == [40, 80, 120]
        assert len(report.episode_rows) == 6
        assert all(row.q_loss is None for row in report.update_rows)
        assert all(row.lyapunov_risk is not None for row in report.update_rows)

    def test_short_last_rollout(self):
        """Test that the final rollout is cut to the remaining budget."""
        _, report = run(tiny_config("ppo", steps=100))
        assert [row.step for row in report.update_rows] == [40, 80, 100]

    def test_zero_beta_matches_ppo(self):
        """Test that LPPO with β = 0 trains exactly like PPO over 1k steps."""
        lppo_trainer, lppo = run(tiny_config("lppo", beta=0.0, steps=1000))
        ppo_trainer, ppo = run(tiny_config("ppo", steps=1000))

        assert lppo.episode_returns() == ppo.episode_returns()
        assert update_column(lppo, "policy_loss") == update_column(ppo, "policy_loss")
        for name, net in ppo_trainer.agent.nets.items():
            np.testing.assert_array_equal(
                lppo_trainer.agent.nets[name].flat_parameters(), net.flat_parameters()
            )

    def test_state_only_variant(self):
        """Test that the on-policy risk baseline fits a state-only candidate."""
        config = tiny_config("lppo-onpolicy-risk")
        trainer = LppoTrainer(build_env(config), config)
        report = trainer.run()
        assert trainer.lyapunov.state_only
        assert trainer.lyapunov.net.input_size == 3
        assert all(row.certification_risk is not None for row in report.update_rows)

class TestQuadrotor:
    """Test short training runs on the tracking task."""

    def test_lsac_run(self):
        """Test that LSAC trains on 13-dimensional tracking errors with a Lyapunov fit."""
        config = tiny_config("lsac", env="quadrotor", steps=60)
        report = train_lsac(build_env(config), config)

        assert [row.step for row in report.episode_rows] == [20, 40, 60]
        assert all(np.isfinite(row.episode_return) for row in report.episode_rows)
        rows = report.update_rows
        assert [row.step for row in rows] == [20, 40, 60]
        assert all(row.lyapunov_risk >= 0.0 and np.isfinite(row.q_loss) for row in rows)

    def test_lppo_run(self):
        """Test that LPPO trains on the tracking task."""
        config = tiny_config("lppo", env="quadrotor", steps=80)
        report = train_lppo(build_env(config), config)

        assert [row.step for row in report.update_rows] == [40, 80]
        assert len(report.episode_rows) == 4
        assert all(row.certification_risk is not None for row in report.update_rows)

    def test_quadrotor_networks(self):
        """Test network input widths for the 13-dimensional observation and 4 actions."""
        config = tiny_config("lsac", env="quadrotor", steps=0)
        trainer = LsacTrainer(build_env(config), config)
        assert trainer.agent.policy.state_dim == 13
        assert trainer.agent.policy.action_dim == 4
        assert trainer.lyapunov.net.input_size == 17


def test_lyapunov_fit_lowers_risk_on_frozen_data():
    """Test that Adam on the training risk reduces it for almost every seed."""
    improved = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        config = tiny_config("lsac", episode_length=50)
        env = build_env(config)
        policy = make_policy(rng)
        data = collect_transitions(env, policy, 200, rng)
        lyap = make_lyapunov(rng, mu=0.01)
        optimizer = AdamState.for_net(lyap.net, learning_rate=1e-2)

        before = training_risk(data, lyap, policy, with_grad=False).value
        for _ in range(200):
            adam_step(lyap.net, training_risk(data, lyap, policy).grads["lyapunov"], optimizer)
        after = training_risk(data, lyap, policy, with_grad=False).value
        improved += after < before
    assert improved >= 9


@pytest.mark.slow
def test_lsac_learns_pendulum():
    """Test that LSAC improves the pendulum return over a short run."""
    config = RunConfig(
        algo="lsac", seed=0, steps=20_000, hidden=[64, 64], warmup_steps=1000, log_interval=1000
    )
    _, report = run(config)
    returns = report.episode_returns()
    assert np.mean(returns[-10:]) > np.mean(returns[:5])
