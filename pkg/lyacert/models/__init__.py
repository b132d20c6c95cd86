"""
Pydantic models: run configuration, training reports, evaluation and
certification summaries.
"""

from lyacert.models.reports import (
    AGGREGATE_HEADER,
    CURVE_HEADER,
    REPORT_HEADER,
    CertificateVerdict,
    CertificationThresholds,
    CurvePoint,
    EvalSummary,
    GridSpec,
    ReportRow,
    RunReport,
    SeedCurve,
    ViolationReport,
)
from lyacert.models.run_config import RunConfig, load_run_config, parse_override

__all__ = [
    "AGGREGATE_HEADER",
    "CURVE_HEADER",
    "REPORT_HEADER",
    "CertificateVerdict",
    "CertificationThresholds",
    "CurvePoint",
    "EvalSummary",
    "GridSpec",
    "ReportRow",
    "RunReport",
    "SeedCurve",
    "ViolationReport",
    "RunConfig",
    "load_run_config",
    "parse_override",
]
