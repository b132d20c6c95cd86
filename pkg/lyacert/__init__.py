"""
lyacert - Lyapunov-guided actor-critic training and stability certification.

lyacert learns neural Lyapunov functions from off-policy (and on-policy)
data, uses their decrease condition to steer SAC and PPO policy updates
(LSAC, LPPO), and certifies the resulting policies through Lyapunov-risk
convergence and sampled Lie-derivative violation statistics.

Core Components:
- nn: dense networks with exact gradients, Adam, squashed Gaussian policy
- envs: pendulum swing-up and quadrotor trajectory tracking
- lyapunov: Lyapunov candidates, Lie derivatives and risks
- algorithms: SAC, LSAC, PPO and LPPO trainers
- cert: evaluation, violation scans, level sets and certificates
"""

# Version
__version__ = "0.1.0"


from lyacert.algorithms import trainers, train_lppo, train_lsac
from lyacert.cert import certify, evaluate_policy, level_set_grid, violation_scan
from lyacert.envs import environments
from lyacert.lyapunov import (
    LyapunovFunction,
    certification_risk,
    on_policy_risk,
    state_lyapunov,
    training_risk,
)
from lyacert.models import RunConfig, RunReport, load_run_config

__all__ = [
    "trainers",
    "train_lppo",
    "train_lsac",
    "certify",
    "evaluate_policy",
    "level_set_grid",
    "violation_scan",
    "environments",
    "LyapunovFunction",
    "certification_risk",
    "on_policy_risk",
    "state_lyapunov",
    "training_risk",
    "RunConfig",
    "RunReport",
    "load_run_config",
]
