"""
Pendulum level sets of the state Lyapunov function over (θ, θ̇).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from lyacert.core.errors import ContractViolation
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.lyapunov.risk import state_lyapunov
from lyacert.models.reports import GridSpec
from lyacert.nn.policy import SquashedGaussianPolicy
from lyacert.utils.csvio import write_csv

LEVELS_HEADER = ["theta", "theta_dot", "L"]


def level_set_grid(
    lyap: LyapunovFunction,
    policy: SquashedGaussianPolicy,
    grid: Optional[GridSpec] = None,
    n_samples: int = 16,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    State Lyapunov values on a (θ, θ̇) grid.

    Returns:
        ``(n_theta, n_theta_dot)`` array; row i is θ_i

    Raises:
        ContractViolation: If the Lyapunov function is not over pendulum observations
    """
    grid = grid or GridSpec()
    if lyap.state_dim != 3:
        raise ContractViolation("Level sets are defined for the pendulum (θ, θ̇) plane only")
    thetas, theta_dots = grid.axes()
    th, thd = np.meshgrid(thetas, theta_dots, indexing="ij")
    obs = np.column_stack([np.cos(th.ravel()), np.sin(th.ravel()), thd.ravel()])
    rng = rng if rng is not None else np.random.default_rng(0)
    values = state_lyapunov(lyap, policy, obs, n_samples=n_samples, rng=rng)
    return np.asarray(values).reshape(grid.n_theta, grid.n_theta_dot)


def grid_minimum(grid: GridSpec, values: np.ndarray) -> Tuple[float, float]:
    """(θ, θ̇) of the smallest grid value."""
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    thetas, theta_dots = grid.axes()
    return float(thetas[i]), float(theta_dots[j])


def write_levels_csv(path: Union[str, Path], grid: GridSpec, values: np.ndarray) -> int:
    thetas, theta_dots = grid.axes()
    rows = (
        (float(thetas[i]), float(theta_dots[j]), float(values[i, j]))
        for i in range(grid.n_theta)
        for j in range(grid.n_theta_dot)
    )
    return write_csv(path, LEVELS_HEADER, rows)
