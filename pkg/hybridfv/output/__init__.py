"""Run artifacts.

Contains:
- RunRecorder, save_run_record, load_run_record: run metadata records
- CSV, legacy VTK and gnuplot writers
"""

from hybridfv.output.recorder import (
    RunRecorder,
    load_run_record,
    package_versions,
    save_run_record,
)
from hybridfv.output.writers import (
    write_convergence_csv,
    write_csv,
    write_diagnostics_csv,
    write_errors_csv,
    write_gnuplot,
    write_snapshot_errors_csv,
    write_vtk,
)

__all__ = [
    "RunRecorder",
    "load_run_record",
    "package_versions",
    "save_run_record",
    "write_convergence_csv",
    "write_csv",
    "write_diagnostics_csv",
    "write_errors_csv",
    "write_gnuplot",
    "write_snapshot_errors_csv",
    "write_vtk",
]
