"""
Exception types raised by lyacert.

Each error also subclasses the builtin it refines, so callers that only
know about ValueError/RuntimeError/IndexError keep working.
"""

from typing import Any, Optional


class LyacertError(Exception):
    """Base class for all lyacert errors."""


class ContractViolation(LyacertError, ValueError):
    """A precondition on shapes or values was not met."""


class ConfigError(LyacertError, ValueError):
    """An experiment configuration is invalid."""


class CheckpointError(LyacertError, ValueError):
    """A checkpoint is missing, corrupt, or lacks a required network."""


class EpisodeEnd(LyacertError, IndexError):
    """A step index ran past the end of a reference trajectory."""


class ReferenceGenerationError(LyacertError, RuntimeError):
    """A reference rollout produced a non-finite state."""


class NumericalAbort(LyacertError, RuntimeError):
    """
    Training produced a non-finite loss or gradient.

    Attributes:
        report: The partial run report collected before the abort
        step: Environment step at which the abort happened
    """

    def __init__(self, message: str, report: Optional[Any] = None, step: int = -1):
        super().__init__(message)
        self.report = report
        self.step = step
