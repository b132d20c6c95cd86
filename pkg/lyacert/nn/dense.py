"""
Dense multilayer perceptrons with exact analytic gradients.

Every function approximator in lyacert (policy trunk, Q, V, target V and
the Lyapunov network) is a `DenseNet`. Losses are fixed compositions of
forward passes, so each loss computes its own cotangents and calls
`DenseNet.backward` per pass; there is no general autodiff tape.

All arithmetic is float64. Inputs may be a single vector ``(in,)`` or a
batch ``(B, in)``; outputs follow the same rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from lyacert.core.errors import ContractViolation

HIDDEN_ACTIVATIONS = ("tanh", "relu")
OUTPUT_ACTIVATIONS = ("identity", "tanh")


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _activation_grad(name: str, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Derivative of the activation, given pre-activation z and output y."""
    if name == "tanh":
        return 1.0 - y * y
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


@dataclass
class DenseGrads:
    """Gradients with exactly the parameter shapes of a DenseNet."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @classmethod
    def zeros_like(cls, net: "DenseNet") -> "DenseGrads":
        return cls(
            weights=[np.zeros_like(w) for w in net.weights],
            biases=[np.zeros_like(b) for b in net.biases],
        )

    def __add__(self, other: "DenseGrads") -> "DenseGrads":
        return DenseGrads(
            weights=[a + b for a, b in zip(self.weights, other.weights)],
            biases=[a + b for a, b in zip(self.biases, other.biases)],
        )

    def scaled(self, factor: float) -> "DenseGrads":
        return DenseGrads(
            weights=[w * factor for w in self.weights],
            biases=[b * factor for b in self.biases],
        )

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights) and all(
            np.all(np.isfinite(b)) for b in self.biases
        )


@dataclass
class ForwardCache:
    """Per-layer pre-activations and outputs recorded by a forward pass."""

    inputs: np.ndarray
    pre: List[np.ndarray] = field(default_factory=list)
    post: List[np.ndarray] = field(default_factory=list)


@dataclass
class DenseNet:
    """
    A fully connected network.

    Attributes:
        layer_sizes: Widths from input to output, e.g. ``[3, 64, 64, 1]``
        weights: Per-layer matrices of shape ``(out, in)``
        biases: Per-layer vectors of length ``out``
        hidden_activation: ``tanh`` or ``relu``
        output_activation: ``identity`` or ``tanh``
    """

    layer_sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    hidden_activation: str = "tanh"
    output_activation: str = "identity"

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2 or any(int(n) <= 0 for n in self.layer_sizes):
            raise ContractViolation(
                f"layer_sizes must be >= 2 positive ints, got {self.layer_sizes}"
            )
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ContractViolation(f"Unknown hidden activation '{self.hidden_activation}'")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ContractViolation(f"Unknown output activation '{self.output_activation}'")
        self.layer_sizes = [int(n) for n in self.layer_sizes]
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ContractViolation("Number of weight/bias arrays does not match layer_sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if w.shape != expected or b.shape != (expected[0],):
                raise ContractViolation(
                    f"Layer {i}: expected weight {expected} and bias ({expected[0]},), "
                    f"got {w.shape} and {b.shape}"
                )

    @classmethod
    def initialize(
        cls,
        layer_sizes: Sequence[int],
        rng: np.random.Generator,
        hidden_activation: str = "tanh",
        output_activation: str = "identity",
    ) -> "DenseNet":
        """
        Create a network with weights uniform in ±1/sqrt(fan_in) and zero biases.
        """
        sizes = [int(n) for n in layer_sizes]
        weights = []
        biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(sizes, weights, biases, hidden_activation, output_activation)

    @classmethod
    def zeros(
        cls,
        layer_sizes: Sequence[int],
        hidden_activation: str = "tanh",
        output_activation: str = "identity",
    ) -> "DenseNet":
        sizes = [int(n) for n in layer_sizes]
        weights = [np.zeros((o, i)) for i, o in zip(sizes[:-1], sizes[1:])]
        biases = [np.zeros(o) for o in sizes[1:]]
        return cls(sizes, weights, biases, hidden_activation, output_activation)

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def activations(self) -> List[str]:
        """Activation name applied after each layer."""
        return [self.hidden_activation] * (self.num_layers - 1) + [self.output_activation]

    def _as_batch(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.input_size:
            raise ContractViolation(
                f"Input has shape {x.shape}, "
                f"expected ({self.input_size},) or (B, {self.input_size})"
            )
        return batch, single

    def forward_cached(self, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        """Forward pass that also returns what `backward` needs."""
        h, single = self._as_batch(x)
        cache = ForwardCache(inputs=h)
        for w, b, act in zip(self.weights, self.biases, self.activations()):
            z = h @ w.T + b
            h = _activate(act, z)
            cache.pre.append(z)
            cache.post.append(h)
        return (h[0] if single else h), cache

    def forward(self, x: np.ndarray) -> np.ndarray:
        """
        Evaluate the network.

        Raises:
            ContractViolation: If the input width does not match layer_sizes[0]
        """
        out, _ = self.forward_cached(x)
        return out

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)

    def backward(
        self,
        x: np.ndarray,
        cotangent: np.ndarray,
        cache: Optional[ForwardCache] = None,
    ) -> Tuple[DenseGrads, np.ndarray]:
        """
        Pull a cotangent on the output back to parameters and input.

        Batched gradients are summed over the batch; losses put their own
        1/B factor into the cotangent.

        Returns:
            (parameter gradients, input gradient with the shape of x)

        Raises:
            ContractViolation: If the cotangent shape does not match the output
        """
        if cache is None:
            _, cache = self.forward_cached(x)
        g = np.asarray(cotangent, dtype=np.float64)
        single = g.ndim == 1
        if single:
            g = g[None, :]
        if g.shape != cache.post[-1].shape:
            raise ContractViolation(
                f"Cotangent has shape {np.shape(cotangent)}, output is {cache.post[-1].shape}"
            )

        grad_w: List[np.ndarray] = [np.empty(0)] * self.num_layers
        grad_b: List[np.ndarray] = [np.empty(0)] * self.num_layers
        acts = self.activations()
        for i in range(self.num_layers - 1, -1, -1):
            g = g * _activation_grad(acts[i], cache.pre[i], cache.post[i])
            layer_in = cache.inputs if i == 0 else cache.post[i - 1]
            grad_w[i] = g.T @ layer_in
            grad_b[i] = g.sum(axis=0)
            g = g @ self.weights[i]
        input_grad = g[0] if single else g
        return DenseGrads(grad_w, grad_b), input_grad

    def copy(self) -> "DenseNet":
        return DenseNet(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.hidden_activation,
            self.output_activation,
        )

    def num_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat_parameters(self) -> np.ndarray:
        return DenseGrads(self.weights, self.biases).flat()

    def set_flat_parameters(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_parameters(),):
            raise ContractViolation(
                f"Expected {self.num_parameters()} parameters, got shape {flat.shape}"
            )
        offset = 0
        for w, b in zip(self.weights, self.biases):
            w[...] = flat[offset:offset + w.size].reshape(w.shape)
            offset += w.size
            b[...] = flat[offset:offset + b.size]
            offset += b.size

    def is_finite(self) -> bool:
        return DenseGrads(self.weights, self.biases).is_finite()

    def same_architecture(self, other: "DenseNet") -> bool:
        return (
            self.layer_sizes == other.layer_sizes
            and self.hidden_activation == other.hidden_activation
            and self.output_activation == other.output_activation
        )


def polyak_update(target: DenseNet, source: DenseNet, tau: float) -> None:
    """
    Track source parameters slowly: target <- tau * source + (1 - tau) * target.

    tau = 1 copies source exactly; tau = 0 leaves target unchanged.
    """
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation(f"tau must be in [0, 1], got {tau}")
    if not target.same_architecture(source):
        raise ContractViolation("Polyak update between networks of different shapes")
    for tw, sw in zip(target.weights, source.weights):
        tw[...] = tau * sw + (1.0 - tau) * tw
    for tb, sb in zip(target.biases, source.biases):
        tb[...] = tau * sb + (1.0 - tau) * tb


def mlp(
    input_size: int,
    hidden: Sequence[int],
    output_size: int,
    rng: np.random.Generator,
    activation: str = "tanh",
) -> DenseNet:
    """Shorthand for `DenseNet.initialize` with an identity output layer."""
    return DenseNet.initialize(
        [input_size, *hidden, output_size], rng, hidden_activation=activation
    )
