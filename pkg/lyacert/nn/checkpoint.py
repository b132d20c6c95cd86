"""
JSON checkpoints.

Format::

    {"nets": {name: {"layer_sizes": [...], "weights": [[...]...],
                     "biases": [...], "activations": [...]}},
     "meta": {"algo": ..., "env": ..., "seed": ..., "step": ..., ...}}

Floats go through Python's shortest round-trip repr, so loading a
checkpoint reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from lyacert.core.errors import CheckpointError, ContractViolation
from lyacert.nn.dense import DenseNet

logger = logging.getLogger(__name__)


def net_to_dict(net: DenseNet) -> Dict[str, Any]:
    return {
        "layer_sizes": list(net.layer_sizes),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "activations": net.activations(),
    }


def net_from_dict(data: Dict[str, Any]) -> DenseNet:
    """
    Rebuild a DenseNet from its checkpoint entry.

    Raises:
        CheckpointError: If fields are missing or inconsistent
    """
    try:
        activations = list(data["activations"])
        hidden = activations[0] if len(activations) > 1 else "tanh"
        return DenseNet(
            layer_sizes=list(data["layer_sizes"]),
            weights=[np.asarray(w, dtype=np.float64) for w in data["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in data["biases"]],
            hidden_activation=hidden,
            output_activation=activations[-1],
        )
    except (KeyError, IndexError, TypeError, ContractViolation) as e:
        raise CheckpointError(f"Invalid network entry: {e}") from e


@dataclass
class Checkpoint:
    """Networks by name plus run metadata."""

    nets: Dict[str, DenseNet]
    meta: Dict[str, Any] = field(default_factory=dict)

    def require(self, name: str, message: str = "") -> DenseNet:
        if name not in self.nets:
            raise CheckpointError(message or f"no '{name}' network in checkpoint")
        return self.nets[name]

    def to_dict(self) -> Dict[str, Any]:
        return {"nets": {k: net_to_dict(v) for k, v in self.nets.items()}, "meta": self.meta}

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        logger.debug(f"Wrote checkpoint {path} with nets {sorted(self.nets)}")
        return path

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Checkpoint":
        if not isinstance(data, dict) or "nets" not in data:
            raise CheckpointError("Checkpoint document lacks a 'nets' object")
        nets = {name: net_from_dict(entry) for name, entry in data["nets"].items()}
        return cls(nets=nets, meta=dict(data.get("meta", {})))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Checkpoint":
        """
        Read a checkpoint file.

        Raises:
            CheckpointError: If the file is missing or not a valid checkpoint
        """
        path = Path(path)
        if not path.is_file():
            raise CheckpointError(f"Checkpoint not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise CheckpointError(f"Corrupt checkpoint {path}: {e}") from e
        return cls.from_dict(data)
