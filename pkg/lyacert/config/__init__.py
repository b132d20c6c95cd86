"""
Configuration module for lyacert.

This module provides centralized access to runtime settings.
"""

from lyacert.config.settings import settings

__all__ = ["settings"]
