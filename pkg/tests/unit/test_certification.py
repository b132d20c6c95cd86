"""Test evaluation, violation scans, level sets, certificates and post-hoc fits."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyacert.cert import (
    certify,
    collect_transitions,
    evaluate_policy,
    fit_posthoc_lyapunov,
    grid_minimum,
    level_set_grid,
    rollout_trajectory,
    violation_scan,
    write_levels_csv,
)
from lyacert.core.errors import ContractViolation
from lyacert.envs.pendulum import PendulumEnv
from lyacert.envs.quadrotor import (
    QuadrotorEnv,
    QuadrotorParams,
    QuadrotorState,
    generate_reference,
)
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.lyapunov.risk import training_risk
from lyacert.models.reports import CertificationThresholds, GridSpec, ViolationReport
from lyacert.nn.dense import DenseNet
from lyacert.nn.policy import SquashedGaussianPolicy
from lyacert.utils.csvio import read_csv
from tests.helpers import ScaledEnv, linear_lyapunov, make_lyapunov, make_policy, zero_policy


def unit_policy():
    return zero_policy(state_dim=1, action_dim=1, scale=1.0)


def hover_policy(params: QuadrotorParams) -> SquashedGaussianPolicy:
    """Mean action is hover thrust with zero body rates."""
    low, high = params.action_bounds()
    trunk = DenseNet.zeros([13, 4, 8])
    return SquashedGaussianPolicy(trunk, (high - low) / 2.0, (high + low) / 2.0)


class TestRollouts:
    """Test trajectory rollout and transition collection."""

    def test_trajectory_layout(self, rng, tmp_path):
        """Test lengths, chaining and the CSV form of one episode."""
        env = ScaledEnv(factor=0.5, episode_length=10)
        traj = rollout_trajectory(env, unit_policy(), rng, initial_state=[1.0])

        assert len(traj) == 10
        assert len(traj.observations) == 11
        assert traj.observations[1][0] == 0.5
        batch = traj.transitions()
        np.testing.assert_array_equal(batch.next_states[:-1], batch.states[1:])
        assert traj.episode_return == pytest.approx(-sum(0.25**k for k in range(1, 11)))

        path = tmp_path / "trajectory.csv"
        assert traj.to_csv(path) == 10
        rows = read_csv(path, ["t", "s0", "a0", "r"])
        assert float(rows[3]["t"]) == pytest.approx(0.3)

    def test_collect_spans_episodes(self, rng):
        """Test that collection continues across episode boundaries."""
        batch = collect_transitions(ScaledEnv(episode_length=10), unit_policy(), 25, rng)
        assert len(batch) == 25
        # every episode restarts in [1, 2]
        assert 1.0 <= batch.states[10, 0] <= 2.0
        assert 1.0 <= batch.states[20, 0] <= 2.0


class TestEvaluatePolicy:
    """Test evaluate_policy."""

    def test_no_episodes(self, rng):
        """Test that zero episodes produce an error summary."""
        summary = evaluate_policy(ScaledEnv(), unit_policy(), 0, rng)
        assert summary.episodes == 0
        assert summary.error is not None

    def test_upright_pendulum(self, rng):
        """Test zero torque from the upright equilibrium."""
        env = PendulumEnv(episode_length=50)
        summary = evaluate_policy(env, zero_policy(), 3, rng, initial_state=(0.0, 0.0))
        assert summary.episodes == 3
        assert summary.mean_return == 0.0
        assert summary.mean_final_distance == 0.0
        assert summary.episode_lengths == [50, 50, 50]
        assert summary.mean_rms_position_error is None

    def test_constant_offset_tracking_error(self, rng):
        """Test the RMS error of a hover held 0.3 m beside a stationary reference."""
        params = QuadrotorParams()
        hover = np.tile([params.hover_thrust, 0.0, 0.0, 0.0], (20, 1))
        env = QuadrotorEnv(params, reference=generate_reference(hover, params), episode_length=20)
        start = QuadrotorState.at_rest((1.3, 0.0, 2.0))

        summary = evaluate_policy(env, hover_policy(params), 2, rng, initial_state=start)
        assert summary.episode_lengths == [20, 20]
        assert summary.rms_position_errors == pytest.approx([0.3, 0.3], abs=1e-9)
        assert summary.tracking_extent == 0.0
        assert summary.relative_tracking_error is None

    def test_tracking_error_against_reference_size(self, rng):
        """Test that the relative error divides by the reference bounding-box diagonal."""
        env = QuadrotorEnv(episode_length=100)
        summary = evaluate_policy(
            env, hover_policy(env.params), 1, rng, initial_state=env.reference[0]
        )
        diagonal = env.reference.bounding_box_diagonal()
        assert diagonal > 0.0
        assert summary.tracking_extent == diagonal
        assert summary.mean_rms_position_error > 0.0
        assert summary.relative_tracking_error == pytest.approx(
            summary.mean_rms_position_error / diagonal
        )


class TestViolationScan:
    """Test violation_scan."""

    def test_constant_candidate_never_violates(self, rng):
        """Test that a constant L has zero Lie derivative everywhere."""
        lyap = linear_lyapunov([0.0], [0.0], dt=0.1, bias=1.0)
        report = violation_scan(ScaledEnv(factor=1.0, shift=1.0), unit_policy(), lyap, 4, rng)
        assert report.total == 40
        assert report.count == 0
        assert report.fraction == 0.0
        assert report.max_lie == 0.0

    def test_increasing_candidate_always_violates(self, rng):
        """Test that L = s along a drifting state flags every transition."""
        lyap = linear_lyapunov([1.0], [0.0], dt=0.1)
        report = violation_scan(ScaledEnv(factor=1.0, shift=1.0), unit_policy(), lyap, 3, rng)
        assert report.count == report.total == 30
        assert report.fraction == 1.0
        assert len(report.violating_states) == 30
        np.testing.assert_allclose(report.lie_values, 10.0)

    @settings(max_examples=25, deadline=None)
    @given(scale=st.floats(0.01, 100.0), seed=st.integers(0, 2**16))
    def test_positive_rescaling_keeps_violations(self, scale, seed):
        """Test that scaling L by c > 0 flags exactly the same transitions."""
        rng = np.random.default_rng(seed)
        env = PendulumEnv(episode_length=20)
        policy = make_policy(rng)
        lyap = make_lyapunov(rng)
        scaled = lyap.copy()
        scaled.net.weights[-1] *= scale
        scaled.net.biases[-1] *= scale

        report = violation_scan(env, policy, lyap, 3, np.random.default_rng(seed))
        rescaled = violation_scan(env, policy, scaled, 3, np.random.default_rng(seed))
        assert rescaled.count == report.count
        assert rescaled.fraction == report.fraction
        np.testing.assert_allclose(
            rescaled.lie_values, scale * np.array(report.lie_values), rtol=1e-6, atol=1e-9 * scale
        )

    def test_violations_csv(self, rng, tmp_path):
        """Test one CSV row per scanned transition."""
        lyap = linear_lyapunov([1.0], [0.0], dt=0.1)
        report = violation_scan(ScaledEnv(factor=0.5), unit_policy(), lyap, 2, rng)
        path = tmp_path / "violations.csv"
        assert report.to_csv(path) == report.total == 20
        assert {row["violation"] for row in read_csv(path)} == {"0"}


class TestCertify:
    """Test certify."""

    def test_decreasing_candidate_passes(self, rng):
        """Test that L = s on a contracting system passes both checks."""
        env = ScaledEnv(factor=0.5)
        policy = unit_policy()
        lyap = linear_lyapunov([1.0], [0.0], dt=0.1)
        fresh = collect_transitions(env, policy, 50, rng)

        verdict = certify(env, policy, lyap, fresh, episodes=5, rng=rng)
        assert verdict.certification_risk == 0.0
        assert verdict.risk_certified
        assert verdict.almost_lyapunov_certified
        assert verdict.violation_count == 0
        assert verdict.total_transitions == 50
        assert verdict.max_violation_distance is None

    def test_sign_flipped_candidate_fails(self, rng):
        """Test that L = −s fails both checks."""
        env = ScaledEnv(factor=0.5)
        policy = unit_policy()
        lyap = linear_lyapunov([-1.0], [0.0], dt=0.1)
        fresh = collect_transitions(env, policy, 50, rng)

        verdict = certify(env, policy, lyap, fresh, episodes=5, rng=rng)
        assert verdict.certification_risk > 0.5
        assert not verdict.risk_certified
        assert not verdict.almost_lyapunov_certified
        assert verdict.violation_fraction == 1.0

    def test_state_only_candidate(self, rng):
        """Test certification of a state-only L(s)."""
        env = ScaledEnv(factor=0.5)
        policy = unit_policy()
        lyap = linear_lyapunov([1.0], dt=0.1)
        fresh = collect_transitions(env, policy, 30, rng)
        verdict = certify(env, policy, lyap, fresh, episodes=2, rng=rng)
        assert verdict.risk_certified and verdict.almost_lyapunov_certified

    @pytest.mark.parametrize("distance, passes", [(0.1, True), (0.9, False)])
    def test_violations_must_stay_near_goal(self, rng, distance, passes):
        """Test the radius condition on violating states."""
        env = ScaledEnv()
        policy = unit_policy()
        lyap = linear_lyapunov([1.0], [0.0], dt=0.1)
        scan = ViolationReport(total=100, count=1, fraction=0.01, violating_states=[[distance]])
        fresh = collect_transitions(env, policy, 10, rng)

        verdict = certify(env, policy, lyap, fresh, scan=scan)
        assert verdict.max_violation_distance == pytest.approx(distance)
        assert verdict.almost_lyapunov_certified is passes

    def test_thresholds_are_applied(self, rng):
        """Test that a tiny violation threshold fails an otherwise clean scan."""
        env = ScaledEnv()
        policy = unit_policy()
        lyap = linear_lyapunov([1.0], [0.0], dt=0.1)
        scan = ViolationReport(total=100, count=2, fraction=0.02, violating_states=[[0.0], [0.0]])
        fresh = collect_transitions(env, policy, 10, rng)

        strict = CertificationThresholds(violation_fraction=0.01)
        assert not certify(env, policy, lyap, fresh, strict, scan=scan).almost_lyapunov_certified
        assert certify(env, policy, lyap, fresh, scan=scan).almost_lyapunov_certified

    def test_empty_fresh_batch(self, rng):
        """Test that certification needs data."""
        env = ScaledEnv()
        policy = unit_policy()
        empty = collect_transitions(env, policy, 5, rng).subset(np.array([], dtype=int))
        with pytest.raises(ContractViolation):
            certify(env, policy, linear_lyapunov([1.0], [0.0], dt=0.1), empty)


class TestLevelSets:
    """Test level_set_grid and its CSV export."""

    def test_grid_shape_and_csv(self, rng, tmp_path):
        """Test the (θ, θ̇) layout of the value grid."""
        grid = GridSpec(n_theta=5, n_theta_dot=7)
        values = level_set_grid(make_lyapunov(rng), zero_policy(), grid, n_samples=4, rng=rng)
        assert values.shape == (5, 7)
        assert np.all(np.isfinite(values))

        path = tmp_path / "levels.csv"
        assert write_levels_csv(path, grid, values) == 35
        rows = read_csv(path, ["theta", "theta_dot", "L"])
        assert float(rows[0]["theta"]) == pytest.approx(-np.pi)
        assert float(rows[0]["theta_dot"]) == -8.0

    def test_state_only_values(self):
        """Test that L(s) = cos θ is reproduced and minimized at θ = ±π."""
        grid = GridSpec(n_theta=9, n_theta_dot=3)
        values = level_set_grid(linear_lyapunov([1.0, 0.0, 0.0]), zero_policy(), grid)
        thetas, _ = grid.axes()
        np.testing.assert_allclose(values[:, 1], np.cos(thetas), atol=1e-12)
        assert abs(grid_minimum(grid, values)[0]) == pytest.approx(np.pi)

    @settings(max_examples=40, deadline=None)
    @given(
        angle_weight=st.floats(0.1, 10.0),
        rate_weight=st.floats(0.1, 10.0),
        n_theta=st.integers(2, 60),
        n_theta_dot=st.integers(2, 60),
    )
    def test_minimum_lies_next_to_the_goal(self, angle_weight, rate_weight, n_theta, n_theta_dot):
        """Test that a candidate vanishing only at the goal has its grid minimum within a cell."""
        # L = rate_weight · |θ̇| + angle_weight · (1 − cos θ) from a ReLU layer
        net = DenseNet(
            [3, 3, 1],
            [
                np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [-1.0, 0.0, 0.0]]),
                np.array([[rate_weight, rate_weight, angle_weight]]),
            ],
            [np.array([0.0, 0.0, 1.0]), np.zeros(1)],
            hidden_activation="relu",
        )
        lyap = LyapunovFunction(net, 0.0, 0.05, np.array([1.0, 0.0, 0.0]), 0)
        grid = GridSpec(n_theta=n_theta, n_theta_dot=n_theta_dot)

        theta, theta_dot = grid_minimum(grid, level_set_grid(lyap, zero_policy(), grid))
        assert abs(theta) <= 2.0 * np.pi / (n_theta - 1) + 1e-12
        assert abs(theta_dot) <= 16.0 / (n_theta_dot - 1) + 1e-12

    def test_rejects_other_state_spaces(self, rng):
        """Test that level sets need pendulum observations."""
        with pytest.raises(ContractViolation):
            level_set_grid(make_lyapunov(rng, state_dim=4), zero_policy(state_dim=4))


class TestPosthocFit:
    """Test fit_posthoc_lyapunov."""

    def test_fit_reduces_risk(self):
        """Test that fitting on frozen data does not increase the risk."""
        env = ScaledEnv(factor=0.5)
        policy = unit_policy()
        data = collect_transitions(env, policy, 100, np.random.default_rng(0))

        initial, _ = fit_posthoc_lyapunov(
            env, policy, 0, np.random.default_rng(3), hidden=(8,), data=data
        )
        fitted, last = fit_posthoc_lyapunov(
            env,
            policy,
            300,
            np.random.default_rng(3),
            hidden=(8,),
            learning_rate=1e-2,
            batch_size=100,
            data=data,
        )
        assert fitted.state_dim == 1 and fitted.action_dim == 1
        assert np.isfinite(last)

        before = training_risk(data, initial, policy, with_grad=False).value
        after = training_risk(data, fitted, policy, with_grad=False).value
        assert after <= before or after < 1e-3
