"""
Minimal dense-network engine: MLPs with analytic gradients, Adam, and the
tanh-squashed Gaussian policy.
"""

from lyacert.nn.adam import AdamState, adam_step
from lyacert.nn.checkpoint import Checkpoint, net_from_dict, net_to_dict
from lyacert.nn.dense import DenseGrads, DenseNet, mlp, polyak_update
from lyacert.nn.loss import LossResult
from lyacert.nn.policy import SquashedGaussianPolicy

__all__ = [
    "AdamState",
    "adam_step",
    "Checkpoint",
    "net_from_dict",
    "net_to_dict",
    "DenseGrads",
    "DenseNet",
    "LossResult",
    "mlp",
    "polyak_update",
    "SquashedGaussianPolicy",
]
