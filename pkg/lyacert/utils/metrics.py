"""
Training metrics for lyacert.

Trainers count environment steps and gradient updates, time each update
phase, and keep the latest value of every loss as a gauge. None of this
enters report.csv (wall-clock timings would break byte-for-byte
reproducibility); the CLI dumps a summary to metrics.json instead.
"""

import threading
import time
from collections import defaultdict, deque
from typing import Any, Deque, Dict, Optional


class MetricsCollector:
    """
    In-memory collector for counters, gauges and phase timers.

    Thread-safe so parallel seed runs may share one collector; each value
    is keyed by name plus optional tags, e.g. ``updates{phase=lyapunov}``.
    """

    def __init__(self, max_history: int = 1000):
        """
        Args:
            max_history: Maximum number of timings kept per timer
        """
        self._lock = threading.RLock()
        self._counters: Dict[str, float] = defaultdict(float)
        self._gauges: Dict[str, float] = {}
        self._timers: Dict[str, Deque[float]] = defaultdict(lambda: deque(maxlen=max_history))

    def increment(
        self, name: str, value: float = 1.0, tags: Optional[Dict[str, str]] = None
    ) -> None:
        with self._lock:
            self._counters[self._make_key(name, tags)] += value

    def set_gauge(self, name: str, value: float, tags: Optional[Dict[str, str]] = None) -> None:
        with self._lock:
            self._gauges[self._make_key(name, tags)] = float(value)

    def record_timer(
        self, name: str, duration: float, tags: Optional[Dict[str, str]] = None
    ) -> None:
        with self._lock:
            self._timers[self._make_key(name, tags)].append(duration)

    def timer(self, name: str, tags: Optional[Dict[str, str]] = None) -> "_TimerContext":
        """
        Context manager timing one update phase.

        Example:
            >>> with metrics.timer("phase", {"phase": "lyapunov"}):
            ...     pass
        """
        return _TimerContext(self, name, tags)

    def get_counter(self, name: str, tags: Optional[Dict[str, str]] = None) -> float:
        with self._lock:
            return self._counters.get(self._make_key(name, tags), 0.0)

    def get_gauge(self, name: str, tags: Optional[Dict[str, str]] = None) -> Optional[float]:
        with self._lock:
            return self._gauges.get(self._make_key(name, tags))

    def get_timer_stats(self, name: str, tags: Optional[Dict[str, str]] = None) -> Dict[str, float]:
        """
        Get timer statistics.

        Returns:
            Dictionary with count, sum, min, max, avg; empty if never recorded
        """
        with self._lock:
            values = list(self._timers.get(self._make_key(name, tags), ()))
        if not values:
            return {}
        return {
            "count": len(values),
            "sum": sum(values),
            "min": min(values),
            "max": max(values),
            "avg": sum(values) / len(values),
        }

    def summary(self) -> Dict[str, Any]:
        """Get all metrics as a JSON-serializable dictionary."""
        with self._lock:
            timers = {key: self._stats(values) for key, values in self._timers.items()}
            return {
                "counters": dict(self._counters),
                "gauges": dict(self._gauges),
                "timers": timers,
            }

    def reset(self) -> None:
        with self._lock:
            self._counters.clear()
            self._gauges.clear()
            self._timers.clear()

    @staticmethod
    def _stats(values: Deque[float]) -> Dict[str, float]:
        if not values:
            return {}
        return {"count": len(values), "sum": sum(values), "avg": sum(values) / len(values)}

    @staticmethod
    def _make_key(name: str, tags: Optional[Dict[str, str]] = None) -> str:
        if not tags:
            return name
        tag_str = ",".join(f"{k}={v}" for k, v in sorted(tags.items()))
        return f"{name}{{{tag_str}}}"


class _TimerContext:
    """Context manager for timing a phase."""

    def __init__(
        self, collector: MetricsCollector, name: str, tags: Optional[Dict[str, str]] = None
    ):
        self.collector = collector
        self.name = name
        self.tags = tags
        self.start_time: Optional[float] = None

    def __enter__(self) -> "_TimerContext":
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        if self.start_time is not None:
            self.collector.record_timer(self.name, time.perf_counter() - self.start_time, self.tags)
