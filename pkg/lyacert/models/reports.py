"""
Report and verdict models.

Training runs produce a `RunReport` (serialized to report.csv); evaluation,
violation scans and certification produce JSON-serializable summaries.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from lyacert.utils.csvio import read_csv, write_csv

logger = logging.getLogger(__name__)

REPORT_HEADER = [
    "step",
    "kind",
    "episode_return",
    "policy_loss",
    "q_loss",
    "value_loss",
    "lyapunov_risk",
    "certification_risk",
    "violation_fraction",
    "entropy",
]
_KIND_ORDER = {"episode": 0, "update": 1}
CURVE_HEADER = ["episode", "step", "episode_return"]
AGGREGATE_HEADER = ["episode", "step", "mean_return", "std_return", "seeds"]


class ReportRow(BaseModel):
    """One report line: an episode end or an update log point."""

    step: int = Field(ge=0)
    kind: Literal["episode", "update"]
    episode_return: Optional[float] = None
    policy_loss: Optional[float] = None
    q_loss: Optional[float] = None
    value_loss: Optional[float] = None
    lyapunov_risk: Optional[float] = None
    certification_risk: Optional[float] = None
    violation_fraction: Optional[float] = None
    entropy: Optional[float] = None

    def cells(self) -> list:
        return [getattr(self, name) for name in REPORT_HEADER]


class RunReport(BaseModel):
    """
    Per-step training log.

    Rows are kept ordered by step; at equal steps the episode row precedes
    the update row.
    """

    algo: str = ""
    env: str = ""
    seed: int = 0
    rows: List[ReportRow] = Field(default_factory=list)

    def add_episode(self, step: int, episode_return: float) -> ReportRow:
        row = ReportRow(step=step, kind="episode", episode_return=float(episode_return))
        return self._append(row)

    def add_update(self, step: int, **losses: Optional[float]) -> ReportRow:
        clean = {k: (None if v is None else float(v)) for k, v in losses.items()}
        return self._append(ReportRow(step=step, kind="update", **clean))

    def _append(self, row: ReportRow) -> ReportRow:
        self.rows.append(row)
        if len(self.rows) > 1 and self._key(self.rows[-2]) > self._key(row):
            self.rows.sort(key=self._key)
        return row

    @staticmethod
    def _key(row: ReportRow) -> tuple:
        return (row.step, _KIND_ORDER[row.kind])

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def episode_rows(self) -> List[ReportRow]:
        return [r for r in self.rows if r.kind == "episode"]

    @property
    def update_rows(self) -> List[ReportRow]:
        return [r for r in self.rows if r.kind == "update"]

    def episode_returns(self) -> List[float]:
        return [float(r.episode_return) for r in self.episode_rows if r.episode_return is not None]

    def final_return(self, last: int = 20) -> Optional[float]:
        """Mean of the last `last` episode returns, None before the first episode ends."""
        returns = self.episode_returns()
        if not returns:
            return None
        return float(np.mean(returns[-last:]))

    def steps_to_reach(self, threshold: float, window: int = 20) -> Optional[int]:
        """
        First step at which the mean of the last `window` episode returns is
        at least `threshold`; None if that never happens.
        """
        window = max(1, window)
        rows = [r for r in self.episode_rows if r.episode_return is not None]
        returns = np.array([r.episode_return for r in rows], dtype=np.float64)
        for k in range(window - 1, len(rows)):
            if returns[k - window + 1 : k + 1].mean() >= threshold:
                return rows[k].step
        return None

    def to_csv(self, path: Union[str, Path]) -> int:
        return write_csv(path, REPORT_HEADER, (row.cells() for row in self.rows))

    def to_curve_csv(self, path: Union[str, Path]) -> int:
        """Learning curve: one row per finished episode, numbered from 1."""
        rows = (
            [i, row.step, row.episode_return]
            for i, row in enumerate(self.episode_rows, start=1)
            if row.episode_return is not None
        )
        return write_csv(path, CURVE_HEADER, rows)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "RunReport":
        report = cls()
        for raw in read_csv(path, REPORT_HEADER):
            values = {
                k: (float(v) if v != "" else None)
                for k, v in raw.items()
                if k not in ("step", "kind")
            }
            report.rows.append(ReportRow(step=int(raw["step"]), kind=raw["kind"], **values))
        return report


class CurvePoint(BaseModel):
    """Return statistics of the k-th episode across seeds."""

    episode: int = Field(ge=1)
    step: float
    mean_return: float
    std_return: float
    seeds: int = Field(ge=1)

    def cells(self) -> list:
        return [getattr(self, name) for name in AGGREGATE_HEADER]


class SeedCurve(BaseModel):
    """
    Learning curve aggregated over several seeds.

    Point k averages the k-th episode return of every run that finished at
    least k episodes; ``step`` is the mean environment step at which those
    episodes ended and ``std_return`` the population standard deviation.
    """

    points: List[CurvePoint] = Field(default_factory=list)

    @classmethod
    def from_reports(cls, reports: Sequence[RunReport]) -> "SeedCurve":
        curves = [
            [
                (r.step, r.episode_return)
                for r in report.episode_rows
                if r.episode_return is not None
            ]
            for report in reports
        ]
        points = []
        longest = max((len(c) for c in curves), default=0)
        for k in range(longest):
            column = [c[k] for c in curves if len(c) > k]
            steps = np.array([s for s, _ in column], dtype=np.float64)
            returns = np.array([g for _, g in column], dtype=np.float64)
            points.append(
                CurvePoint(
                    episode=k + 1,
                    step=float(steps.mean()),
                    mean_return=float(returns.mean()),
                    std_return=float(returns.std()),
                    seeds=len(column),
                )
            )
        return cls(points=points)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path: Union[str, Path]) -> int:
        return write_csv(path, AGGREGATE_HEADER, (p.cells() for p in self.points))


class EvalSummary(BaseModel):
    """Deterministic-policy evaluation over several episodes."""

    episodes: int = 0
    returns: List[float] = Field(default_factory=list)
    final_distances: List[float] = Field(default_factory=list)
    episode_lengths: List[int] = Field(default_factory=list)
    mean_return: Optional[float] = None
    std_return: Optional[float] = None
    mean_final_distance: Optional[float] = None
    rms_position_errors: List[float] = Field(default_factory=list)
    mean_rms_position_error: Optional[float] = None
    tracking_extent: Optional[float] = None
    relative_tracking_error: Optional[float] = None
    error: Optional[str] = None

    @classmethod
    def from_episodes(
        cls,
        returns: List[float],
        final_distances: List[float],
        lengths: List[int],
        rms_position_errors: Optional[List[float]] = None,
        tracking_extent: Optional[float] = None,
    ) -> "EvalSummary":
        """
        Aggregate per-episode results.

        Tracking runs also pass the per-episode RMS position error and the
        reference bounding-box diagonal; the relative error is their ratio.
        """
        if not returns:
            return cls(error="no episodes evaluated")
        tracking = [float(e) for e in rms_position_errors or []]
        mean_rms = float(np.mean(tracking)) if tracking else None
        relative = None
        if mean_rms is not None and tracking_extent:
            relative = mean_rms / float(tracking_extent)
        return cls(
            episodes=len(returns),
            returns=[float(r) for r in returns],
            final_distances=[float(d) for d in final_distances],
            episode_lengths=list(lengths),
            mean_return=float(np.mean(returns)),
            std_return=float(np.std(returns)),
            mean_final_distance=float(np.mean(final_distances)),
            rms_position_errors=tracking,
            mean_rms_position_error=mean_rms,
            tracking_extent=tracking_extent,
            relative_tracking_error=relative,
        )


class ViolationReport(BaseModel):
    """
    Lie-derivative statistics over sampled closed-loop transitions.

    ``states`` and ``lie_values`` hold every scanned transition for the
    violations CSV and are left out of the JSON form.
    """

    total: int = 0
    count: int = 0
    fraction: float = 0.0
    episodes: int = 0
    violating_states: List[List[float]] = Field(default_factory=list)
    mean_lie: Optional[float] = None
    max_lie: Optional[float] = None
    states: List[List[float]] = Field(default_factory=list, exclude=True)
    lie_values: List[float] = Field(default_factory=list, exclude=True)

    @model_validator(mode="after")
    def check_fraction(self) -> "ViolationReport":
        if not 0 <= self.count <= self.total:
            raise ValueError(f"violation count {self.count} outside [0, {self.total}]")
        expected = self.count / self.total if self.total else 0.0
        if not math.isclose(self.fraction, expected, rel_tol=0.0, abs_tol=1e-12):
            raise ValueError(f"fraction {self.fraction} != count/total {expected}")
        return self

    def to_csv(self, path: Union[str, Path]) -> int:
        """One row per scanned transition: state, Lie derivative, violation flag."""
        width = len(self.states[0]) if self.states else 0
        header = [f"s{i}" for i in range(width)] + ["lie", "violation"]
        rows = (list(s) + [lie, lie > 0.0] for s, lie in zip(self.states, self.lie_values))
        return write_csv(path, header, rows)


class CertificationThresholds(BaseModel):
    """Acceptance thresholds for the two certification methods."""

    risk: float = Field(default=1e-3, gt=0.0)
    violation_fraction: float = Field(default=0.05, gt=0.0, le=1.0)
    radius: float = Field(default=0.5, gt=0.0)


class CertificateVerdict(BaseModel):
    """
    Outcome of certification.

    ``risk_certified`` holds iff the certification risk on fresh data is
    below the risk threshold. ``almost_lyapunov_certified`` holds iff the
    violation fraction is below its threshold and every violating state lies
    within ``radius`` of the goal.
    """

    certification_risk: float
    batch_size: int
    violation_fraction: float
    violation_count: int
    total_transitions: int
    max_violation_distance: Optional[float] = None
    thresholds: CertificationThresholds = Field(default_factory=CertificationThresholds)
    risk_certified: bool
    almost_lyapunov_certified: bool


class GridSpec(BaseModel):
    """
    Axis-aligned (θ, θ̇) grid for pendulum level sets.

    An axis with a single point must have low == high.
    """

    theta_low: float = -math.pi
    theta_high: float = math.pi
    n_theta: int = 101
    theta_dot_low: float = -8.0
    theta_dot_high: float = 8.0
    n_theta_dot: int = 101

    @model_validator(mode="after")
    def check_axes(self) -> "GridSpec":
        for name, low, high, n in (
            ("theta", self.theta_low, self.theta_high, self.n_theta),
            ("theta_dot", self.theta_dot_low, self.theta_dot_high, self.n_theta_dot),
        ):
            if n < 1 or (n == 1 and low != high):
                raise ValueError(f"Degenerate {name} axis: {n} point(s) over [{low}, {high}]")
            if n > 1 and not low < high:
                raise ValueError(f"{name} axis needs low < high, got [{low}, {high}]")
        return self

    def axes(self) -> tuple:
        return (
            np.linspace(self.theta_low, self.theta_high, self.n_theta),
            np.linspace(self.theta_dot_low, self.theta_dot_high, self.n_theta_dot),
        )

    @property
    def size(self) -> int:
        return self.n_theta * self.n_theta_dot
