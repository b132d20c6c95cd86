"""
Certification and analysis: evaluation, violation scans, level sets,
certificates and post-hoc Lyapunov fits.
"""

from lyacert.cert.certify import certify
from lyacert.cert.evaluation import (
    Trajectory,
    collect_transitions,
    evaluate_policy,
    rollout_trajectory,
)
from lyacert.cert.levels import grid_minimum, level_set_grid, write_levels_csv
from lyacert.cert.posthoc import fit_posthoc_lyapunov
from lyacert.cert.violations import violation_scan

__all__ = [
    "certify",
    "Trajectory",
    "collect_transitions",
    "evaluate_policy",
    "rollout_trajectory",
    "grid_minimum",
    "level_set_grid",
    "write_levels_csv",
    "fit_posthoc_lyapunov",
    "violation_scan",
]
