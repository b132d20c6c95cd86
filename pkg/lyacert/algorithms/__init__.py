"""
SAC, LSAC, PPO and LPPO trainers.

Trainers are looked up by algorithm name through `trainers`, e.g.
``trainers.create(config.algo, env, config)``.
"""

from lyacert.algorithms.common import (
    LyapunovConfig,
    RngStreams,
    Trainer,
    build_env,
    config_from_checkpoint,
    lyapunov_from_checkpoint,
    policy_from_checkpoint,
)
from lyacert.algorithms.lppo import LppoTrainer, train_lppo
from lyacert.algorithms.lsac import LsacTrainer, train_lsac
from lyacert.algorithms.ppo import (
    PpoAgent,
    PpoMinibatch,
    augmented_advantage,
    lppo_policy_loss,
    ppo_policy_loss,
    ppo_value_loss,
)
from lyacert.algorithms.sac import (
    SacAgent,
    lsac_policy_loss,
    sac_policy_loss,
    sac_update,
    sac_value_losses,
)
from lyacert.core.registry import Registry

trainers: Registry[Trainer] = Registry("trainer")
for _name in ("sac", "lsac"):
    trainers.register(_name, LsacTrainer)
for _name in ("ppo", "lppo", "lppo-onpolicy-risk"):
    trainers.register(_name, LppoTrainer)

__all__ = [
    "trainers",
    "LyapunovConfig",
    "RngStreams",
    "Trainer",
    "build_env",
    "config_from_checkpoint",
    "lyapunov_from_checkpoint",
    "policy_from_checkpoint",
    "LppoTrainer",
    "train_lppo",
    "LsacTrainer",
    "train_lsac",
    "PpoAgent",
    "PpoMinibatch",
    "augmented_advantage",
    "lppo_policy_loss",
    "ppo_policy_loss",
    "ppo_value_loss",
    "SacAgent",
    "lsac_policy_loss",
    "sac_policy_loss",
    "sac_update",
    "sac_value_losses",
]
