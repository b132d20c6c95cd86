"""
Neural Lyapunov candidates, Lie derivatives and Lyapunov risks.
"""

from lyacert.lyapunov.function import LyapunovFunction
from lyacert.lyapunov.risk import (
    certification_risk,
    on_policy_risk,
    state_lyapunov,
    training_risk,
)

__all__ = [
    "LyapunovFunction",
    "certification_risk",
    "on_policy_risk",
    "state_lyapunov",
    "training_risk",
]
