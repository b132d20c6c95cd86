"""
Runtime settings for lyacert.

This module provides centralized configuration for everything that is not
part of an experiment: where artifacts go, how loud logging is, and how
often checkpoints are written. Experiment hyperparameters live in
`lyacert.models.run_config.RunConfig` instead.
"""

import logging
import os
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).lower() == "true"


class Settings(BaseModel):
    """
    Runtime settings for lyacert.

    Every field defaults from a LYACERT_* environment variable, so a
    fresh `Settings()` always reflects the current process environment.
    Defaults are validated like explicit values.
    """

    OUTPUT_ROOT: Path = Field(
        default_factory=lambda: Path(os.getenv("LYACERT_OUT", "runs")),
        description="Root directory for run artifacts",
    )
    DEBUG: bool = Field(
        default_factory=lambda: _env_bool("LYACERT_DEBUG"),
        description="Enable debug logging",
    )
    LOG_LEVEL: str = Field(
        default_factory=lambda: os.getenv("LYACERT_LOG_LEVEL", "INFO").upper(),
        description="Logging level used by the command-line interface",
    )
    CHECKPOINT_INTERVAL: int = Field(
        default_factory=lambda: int(os.getenv("LYACERT_CHECKPOINT_INTERVAL", "10000")),
        description="Environment steps between periodic checkpoints (0 disables them)",
    )

    model_config = {"validate_assignment": True, "validate_default": True}

    @field_validator("LOG_LEVEL")
    @classmethod
    def check_log_level(cls, v: str) -> str:
        if v not in _LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got '{v}'")
        return v

    @field_validator("CHECKPOINT_INTERVAL")
    @classmethod
    def check_interval(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"CHECKPOINT_INTERVAL must be >= 0, got {v}")
        return v

    def effective_log_level(self) -> int:
        """
        Get the numeric logging level.

        Returns:
            int: logging.DEBUG when DEBUG is set, otherwise LOG_LEVEL
        """
        if self.DEBUG:
            return logging.DEBUG
        return logging.getLevelName(self.LOG_LEVEL)

    def output_dir_for(self, name: str) -> Path:
        """Get the directory for a named run under OUTPUT_ROOT."""
        return self.OUTPUT_ROOT / name


# Create global settings instance
settings = Settings()
