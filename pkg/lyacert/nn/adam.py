"""
Adam optimizer state and step for DenseNet parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from lyacert.core.errors import ContractViolation, NumericalAbort
from lyacert.nn.dense import DenseGrads, DenseNet


@dataclass
class AdamState:
    """
    First and second moments mirroring a DenseNet's parameters.

    Attributes:
        m_weights, m_biases: First moment estimates
        v_weights, v_biases: Second moment estimates (elementwise >= 0)
        step_count: Number of steps taken
    """

    m_weights: List[np.ndarray]
    m_biases: List[np.ndarray]
    v_weights: List[np.ndarray]
    v_biases: List[np.ndarray]
    step_count: int = 0
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_net(
        cls,
        net: DenseNet,
        learning_rate: float = 3e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        if min(learning_rate, beta1, beta2, epsilon) <= 0.0:
            raise ContractViolation("Adam hyperparameters must be positive")
        return cls(
            m_weights=[np.zeros_like(w) for w in net.weights],
            m_biases=[np.zeros_like(b) for b in net.biases],
            v_weights=[np.zeros_like(w) for w in net.weights],
            v_biases=[np.zeros_like(b) for b in net.biases],
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )

    def matches(self, net: DenseNet) -> bool:
        return [m.shape for m in self.m_weights] == [w.shape for w in net.weights] and [
            m.shape for m in self.m_biases
        ] == [b.shape for b in net.biases]


def _check_shapes(net: DenseNet, grads: DenseGrads) -> None:
    if [g.shape for g in grads.weights] != [w.shape for w in net.weights] or [
        g.shape for g in grads.biases
    ] != [b.shape for b in net.biases]:
        raise ContractViolation("Gradient shapes do not match the network")


def adam_step(net: DenseNet, grads: DenseGrads, state: AdamState) -> Tuple[DenseNet, AdamState]:
    """
    Apply one bias-corrected Adam update in place.

    Returns:
        The same (net, state) objects, updated

    Raises:
        ContractViolation: If gradient or state shapes do not match the network
        NumericalAbort: If any gradient entry is NaN or infinite; nothing is updated
    """
    _check_shapes(net, grads)
    if not state.matches(net):
        raise ContractViolation("Adam state shapes do not match the network")
    if not grads.is_finite():
        raise NumericalAbort("Adam step rejected: non-finite gradient")

    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t

    params = list(zip(net.weights, grads.weights, state.m_weights, state.v_weights)) + list(
        zip(net.biases, grads.biases, state.m_biases, state.v_biases)
    )
    for p, g, m, v in params:
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return net, state
