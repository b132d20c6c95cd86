"""
Value-plus-gradient container returned by every loss recipe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from lyacert.nn.dense import DenseGrads


@dataclass
class LossResult:
    """
    A scalar loss with gradients for the networks it trains.

    Attributes:
        value: Loss value
        grads: Parameter gradients keyed by network name (``lyapunov``,
            ``policy``, ``q``, ...); networks held constant are absent
        aux: Per-sample intermediates useful for diagnostics and tests
    """

    value: float
    grads: Dict[str, DenseGrads] = field(default_factory=dict)
    aux: Dict[str, np.ndarray] = field(default_factory=dict)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.value)) and all(g.is_finite() for g in self.grads.values())
