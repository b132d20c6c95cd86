"""
Scalar-first unit quaternion helpers ``(w, x, y, z)``.
"""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def multiply(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Hamilton product q ⊗ r."""
    w1, x1, y1, z1 = q
    w2, x2, y2, z2 = r
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def inverse(q: np.ndarray) -> np.ndarray:
    return conjugate(q) / float(np.dot(q, q))


def normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q)


def from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def exp_rotation(omega: np.ndarray, dt: float) -> np.ndarray:
    """Quaternion of a body rotation at constant rate omega held for dt."""
    rate = float(np.linalg.norm(omega))
    if rate < 1e-15:
        return IDENTITY.copy()
    return from_axis_angle(omega / rate, rate * dt)


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """Body-to-world rotation matrix R(q) of a unit quaternion."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def error(q: np.ndarray, q_ref: np.ndarray) -> np.ndarray:
    """Orientation error q_ref⁻¹ ⊗ q; identity when aligned."""
    return multiply(inverse(q_ref), q)
