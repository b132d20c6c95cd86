"""Utility helpers: training metrics and deterministic CSV output."""

from lyacert.utils.metrics import MetricsCollector

__all__ = ["MetricsCollector"]
