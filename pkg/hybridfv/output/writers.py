"""CSV tables, legacy VTK cell fields and gnuplot data files.

Floats are written with 17 significant digits so that identical runs give
identical files.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.mesh.geometry import Mesh
from hybridfv.solver.state import SolverDiagnostics
from hybridfv.verification.convergence import ConvergenceTable
from hybridfv.verification.errors import ErrorReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"

VTK_VERTEX = 1
VTK_QUAD = 9
VTK_HEXAHEDRON = 12

DIAGNOSTIC_COLUMNS = (
    "step",
    "time",
    "iterations",
    "residual",
    "halvings",
    "conservation_defect",
    "l2_norm",
    "gradient_norm",
    "beta_l2_norm",
)
ERROR_COLUMNS = ("N", "h", "elements", "faces", "Err", "front_error", "runtime_s")
SNAPSHOT_ERROR_COLUMNS = ("time", "error", "absolute")

# Corner order of VTK quads and hexahedra as (upper?) flags per axis
_QUAD_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_HEXAHEDRON_CORNERS = (
    (0, 0, 0),
    (1, 0, 0),
    (1, 1, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (1, 1, 1),
    (0, 1, 1),
)


def format_value(value: Any) -> str:
    """Render a table cell; floats with ``FLOAT_FORMAT``, None as empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def write_csv(
    path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Write a CSV file with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.debug("Wrote %s", path)
    return path


def write_diagnostics_csv(path: str | Path, diagnostics: SolverDiagnostics) -> Path:
    """Write one row of step diagnostics per accepted time step."""
    rows = (
        [step.to_dict()[column] for column in DIAGNOSTIC_COLUMNS]
        for step in diagnostics.steps
    )
    return write_csv(path, DIAGNOSTIC_COLUMNS, rows)


def write_errors_csv(path: str | Path, report: ErrorReport, steps: int) -> Path:
    """Write the Err summary of a run in the convergence table layout."""
    row = (
        steps,
        report.h,
        report.elements,
        report.faces,
        report.err,
        report.front_error,
        report.runtime,
    )
    return write_csv(path, ERROR_COLUMNS, [row])


def write_snapshot_errors_csv(path: str | Path, report: ErrorReport) -> Path:
    """Write the L2 error of every snapshot."""
    rows = zip(report.times, report.errors, report.absolute, strict=True)
    return write_csv(path, SNAPSHOT_ERROR_COLUMNS, rows)


def write_convergence_csv(path: str | Path, table: ConvergenceTable) -> Path:
    """Write a convergence table (``N,h,elements,faces,Err,order,runtime_s``)."""
    header, *rows = table.to_rows()
    return write_csv(path, header, rows)


def write_gnuplot(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    title: str | None = None,
) -> Path:
    """Write a whitespace-separated table with ``#`` comment headers."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        if title:
            f.write(f"# {title}\n")
        f.write("# " + " ".join(columns) + "\n")
        for row in rows:
            f.write(" ".join(format_value(value) for value in row) + "\n")
    logger.debug("Wrote %s", path)
    return path


def write_vtk(
    path: str | Path,
    mesh: Mesh,
    field: DiscreteField,
    beta_values: np.ndarray,
    regions: np.ndarray,
    title: str = "hybridfv cell field",
) -> Path:
    """Write cell data ``u``, ``beta_u`` and ``region`` as legacy VTK.

    The file is an unstructured grid.

    Box meshes are written as hexahedra (quads in 2D) with their own corner
    points, so hanging nodes of nonmatching meshes need no special handling.
    Meshes without box geometry are written as one vertex per cell point.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points, connectivity, cell_type = _vtk_cells(mesh)
    n_cells = mesh.n_cells
    per_cell = connectivity.shape[1]

    with path.open("w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {points.shape[0]} double\n")
        for point in points:
            f.write(" ".join(format_value(c) for c in point) + "\n")
        f.write(f"\nCELLS {n_cells} {n_cells * (per_cell + 1)}\n")
        for corners in connectivity:
            f.write(f"{per_cell} " + " ".join(str(int(c)) for c in corners) + "\n")
        f.write(f"\nCELL_TYPES {n_cells}\n")
        f.write(f"{cell_type}\n" * n_cells)
        f.write(f"\nCELL_DATA {n_cells}\n")
        for name, values, kind in (
            ("u", field.cell_values, "double"),
            ("beta_u", beta_values, "double"),
            ("region", regions, "int"),
        ):
            f.write(f"SCALARS {name} {kind} 1\n")
            f.write("LOOKUP_TABLE default\n")
            for value in np.asarray(values):
                f.write(format_value(value) + "\n")
    logger.debug("Wrote %s", path)
    return path


def _vtk_cells(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, int]:
    """Points (padded to 3D), per-cell connectivity and the VTK cell type."""
    boxes = mesh.cell_boxes()
    n_cells = mesh.n_cells
    if boxes is None:
        points = _pad(mesh.cell_centers)
        return points, np.arange(n_cells)[:, None], VTK_VERTEX

    corners = _HEXAHEDRON_CORNERS if mesh.dim == 3 else _QUAD_CORNERS
    flags = np.array(corners)
    axes = np.arange(mesh.dim)
    # boxes[K, flag, axis] picks lower or upper coordinates per axis
    points = boxes[:, flags, axes].reshape(-1, mesh.dim)
    connectivity = np.arange(n_cells * len(corners)).reshape(n_cells, len(corners))
    return _pad(points), connectivity, VTK_HEXAHEDRON if mesh.dim == 3 else VTK_QUAD


def _pad(points: np.ndarray) -> np.ndarray:
    if points.shape[1] == 3:
        return points
    return np.hstack([points, np.zeros((points.shape[0], 3 - points.shape[1]))])
