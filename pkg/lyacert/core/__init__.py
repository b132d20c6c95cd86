"""
Core building blocks for lyacert: errors, run identity and registries.
"""

from lyacert.core.errors import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    EpisodeEnd,
    LyacertError,
    NumericalAbort,
    ReferenceGenerationError,
)
from lyacert.core.identity import new_run_id
from lyacert.core.registry import Registry

__all__ = [
    "CheckpointError",
    "ConfigError",
    "ContractViolation",
    "EpisodeEnd",
    "LyacertError",
    "NumericalAbort",
    "ReferenceGenerationError",
    "new_run_id",
    "Registry",
]
