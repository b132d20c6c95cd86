"""Tests for the quaternion helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyacert.envs import quaternion as quat

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
unit_quaternions = st.tuples(finite, finite, finite, finite).filter(
    lambda q: np.linalg.norm(q) > 0.1
).map(lambda q: quat.normalize(np.array(q)))


class TestQuaternion:
    """Test quaternion algebra."""

    def test_identity(self):
        """Test that the identity is neutral for the product."""
        q = quat.from_axis_angle(np.array([1.0, 2.0, 3.0]), 0.7)
        assert np.allclose(quat.multiply(q, quat.IDENTITY), q)
        assert np.allclose(quat.multiply(quat.IDENTITY, q), q)

    def test_axis_angle_rotation(self):
        """Test a quarter turn about z maps x onto y."""
        q = quat.from_axis_angle(np.array([0.0, 0.0, 1.0]), np.pi / 2)
        assert np.allclose(quat.rotation_matrix(q) @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0])

    def test_exp_rotation_of_zero_rate(self):
        """Test that a zero rate gives the identity."""
        assert np.array_equal(quat.exp_rotation(np.zeros(3), 0.1), quat.IDENTITY)

    def test_error_of_aligned_is_identity(self):
        """Test that the orientation error of equal quaternions is the identity."""
        q = quat.from_axis_angle(np.array([0.3, -1.0, 0.2]), 1.1)
        assert np.allclose(quat.error(q, q), quat.IDENTITY)

    @settings(max_examples=50, deadline=None)
    @given(unit_quaternions, unit_quaternions)
    def test_product_preserves_norm(self, q, r):
        """Test that the product of unit quaternions is a unit quaternion."""
        assert np.linalg.norm(quat.multiply(q, r)) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(unit_quaternions)
    def test_rotation_matrix_is_orthonormal(self, q):
        """Test R(q) Rᵀ(q) = I and det R(q) = 1."""
        r = quat.rotation_matrix(q)
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(unit_quaternions)
    def test_inverse(self, q):
        """Test q ⊗ q⁻¹ = identity."""
        assert np.allclose(quat.multiply(q, quat.inverse(q)), quat.IDENTITY, atol=1e-12)
