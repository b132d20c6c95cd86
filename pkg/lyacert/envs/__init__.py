"""
Native environments: pendulum swing-up and quadrotor trajectory tracking.

Environments are looked up by name through `environments`, e.g.
``environments.create("pendulum", episode_length=200)``.
"""

from lyacert.core.registry import Registry
from lyacert.envs.base import Environment, EnvSpec, StepResult
from lyacert.envs.pendulum import (
    PendulumEnv,
    PendulumParams,
    PendulumState,
    pendulum_reset,
    pendulum_step,
)
from lyacert.envs.quadrotor import (
    QuadrotorEnv,
    QuadrotorParams,
    QuadrotorState,
    ReferenceTrajectory,
    default_reference_actions,
    generate_reference,
    quadrotor_observe,
    quadrotor_step,
)

environments: Registry[Environment] = Registry("environment")
environments.register("pendulum", PendulumEnv)
environments.register("quadrotor", QuadrotorEnv)

__all__ = [
    "environments",
    "Environment",
    "EnvSpec",
    "StepResult",
    "PendulumEnv",
    "PendulumParams",
    "PendulumState",
    "pendulum_reset",
    "pendulum_step",
    "QuadrotorEnv",
    "QuadrotorParams",
    "QuadrotorState",
    "ReferenceTrajectory",
    "default_reference_actions",
    "generate_reference",
    "quadrotor_observe",
    "quadrotor_step",
]
