"""Verification against exact solutions.

Contains:
- ErrorReport, error_metric, snapshot_errors: relative L2 errors over time
- front_position, front_track, oscillation_report: front and range diagnostics
- ConvergenceTable, build_levels, convergence_study, fitted_order: refinement studies
"""

from hybridfv.verification.convergence import (
    CSV_COLUMNS,
    ConvergenceRow,
    ConvergenceTable,
    LevelSpec,
    build_levels,
    convergence_study,
    fitted_order,
)
from hybridfv.verification.errors import (
    ErrorReport,
    OscillationReport,
    error_metric,
    error_report,
    exact_front,
    front_position,
    front_track,
    has_front,
    oscillation_report,
    snapshot_errors,
)

__all__ = [
    "CSV_COLUMNS",
    "ConvergenceRow",
    "ConvergenceTable",
    "ErrorReport",
    "LevelSpec",
    "OscillationReport",
    "build_levels",
    "convergence_study",
    "error_metric",
    "error_report",
    "exact_front",
    "fitted_order",
    "front_position",
    "front_track",
    "has_front",
    "oscillation_report",
    "snapshot_errors",
]
