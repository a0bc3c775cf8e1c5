"""Tests for the CSV, gnuplot and VTK writers."""

import csv

import numpy as np
import pytest

from hybridfv.discretization import DiscreteField
from hybridfv.mesh import build_box_mesh, generate_mesh, read_mesh, write_mesh
from hybridfv.output import (
    write_convergence_csv,
    write_csv,
    write_diagnostics_csv,
    write_errors_csv,
    write_gnuplot,
    write_snapshot_errors_csv,
    write_vtk,
)
from hybridfv.output.writers import DIAGNOSTIC_COLUMNS, format_value
from hybridfv.solver import SolverDiagnostics, StepDiagnostics
from hybridfv.verification import (
    ConvergenceRow,
    ConvergenceTable,
    ErrorReport,
    LevelSpec,
)

SLAB = ((0.0, 2.0), (0.0, 1.0), (0.0, 1.0))


def read_rows(path):
    """Rows of a CSV file, header first."""
    with path.open(newline="") as f:
        return list(csv.reader(f))


def sample_report(front_error=None):
    """Error report with two snapshots."""
    return ErrorReport(
        err=0.0125,
        times=np.array([0.0, 0.5]),
        errors=np.array([0.0, 0.0125]),
        absolute=np.array([False, True]),
        h=0.75,
        elements=165,
        faces=672,
        runtime=2.5,
        front_error=front_error,
    )


def vtk_sections(path):
    """Header lines of a legacy VTK file keyed by their first word."""
    lines = path.read_text().splitlines()
    sections = {
        line.split()[0]: line
        for line in lines
        if line[:1].isalpha() and line.split()[0].isupper()
    }
    return sections, lines


class TestFormatting:
    """Tests for value formatting."""

    def test_format_value(self) -> None:
        """Test None, booleans, integers, floats and strings."""
        assert format_value(None) == ""
        assert format_value(True) == "1"
        assert format_value(np.int64(3)) == "3"
        assert format_value(0.1) == "0.10000000000000001"
        assert float(format_value(np.float64(1.0 / 3.0))) == 1.0 / 3.0
        assert format_value("x1-") == "x1-"


class TestCsv:
    """Tests for the CSV writers."""

    def test_write_csv_creates_directory(self, tmp_path) -> None:
        """Test that parent directories are created."""
        path = write_csv(tmp_path / "a" / "b.csv", ["x", "y"], [[1, 2.5], [None, "z"]])

        assert read_rows(path) == [["x", "y"], ["1", "2.5"], ["", "z"]]

    def test_diagnostics(self, tmp_path) -> None:
        """Test one row per step in column order."""
        diagnostics = SolverDiagnostics()
        for step in (1, 2):
            diagnostics.record(
                StepDiagnostics(step, 0.5 * step, 2, 1e-12, 0, 0.0, 1.0, 2.0, 3.0),
                0.5,
            )

        path = write_diagnostics_csv(tmp_path / "diagnostics.csv", diagnostics)
        rows = read_rows(path)

        assert rows[0] == list(DIAGNOSTIC_COLUMNS)
        assert len(rows) == 3
        assert rows[2][:3] == ["2", "1", "2"]

    def test_errors(self, tmp_path) -> None:
        """Test the run summary row with and without a front error."""
        rows = read_rows(write_errors_csv(tmp_path / "errors.csv", sample_report(), 50))
        fronted = read_rows(
            write_errors_csv(tmp_path / "front.csv", sample_report(0.025), 50)
        )

        assert rows[0] == [
            "N",
            "h",
            "elements",
            "faces",
            "Err",
            "front_error",
            "runtime_s",
        ]
        assert rows[1][:4] == ["50", "0.75", "165", "672"]
        assert float(rows[1][4]) == 0.0125
        assert rows[1][5:] == ["", "2.5"]
        assert float(fronted[1][5]) == 0.025

    def test_snapshot_errors(self, tmp_path) -> None:
        """Test one row per snapshot with the absolute flag."""
        path = write_snapshot_errors_csv(tmp_path / "snapshots.csv", sample_report())
        rows = read_rows(path)

        assert rows[0] == ["time", "error", "absolute"]
        assert rows[1] == ["0", "0", "0"]
        assert rows[2][0] == "0.5"
        assert float(rows[2][1]) == 0.0125
        assert rows[2][2] == "1"

    def test_convergence(self, tmp_path) -> None:
        """Test the convergence table layout."""
        table = ConvergenceTable()
        for index, (h, err) in enumerate([(0.75, 0.04), (0.375, 0.01)]):
            level = LevelSpec(
                level=index,
                resolution=(1,),
                steps=50 * 2**index,
                probability=0.3,
                seed=index,
            )
            table.add(
                ConvergenceRow(
                    level=level, h=h, elements=10, faces=40, err=err, runtime=1.0
                )
            )

        rows = read_rows(write_convergence_csv(tmp_path / "convergence.csv", table))

        assert rows[0] == [
            "N",
            "h",
            "elements",
            "faces",
            "Err",
            "order",
            "runtime_s",
        ]
        assert rows[1][5] == ""
        assert float(rows[2][5]) == pytest.approx(2.0)


class TestGnuplot:
    """Tests for write_gnuplot."""

    def test_layout(self, tmp_path) -> None:
        """Test comment headers and whitespace-separated rows."""
        path = write_gnuplot(
            tmp_path / "errors.dat",
            ("t", "error"),
            [(0.0, 0.0), (0.5, 0.25)],
            title="test1",
        )

        assert path.read_text().splitlines() == [
            "# test1",
            "# t error",
            "0 0",
            "0.5 0.25",
        ]

    def test_without_title(self, tmp_path) -> None:
        """Test that the title line is optional."""
        path = write_gnuplot(tmp_path / "front.dat", ("t", "front"), [])

        assert path.read_text() == "# t front\n"


class TestVtk:
    """Tests for write_vtk."""

    def test_hexahedra(self, tmp_path) -> None:
        """Test a nonmatching 3D mesh written as independent hexahedra."""
        mesh = generate_mesh(SLAB, [2, 1, 1], probability=0.5, seed=4)
        n = mesh.n_cells
        field = DiscreteField(np.arange(n, dtype=float), np.zeros(mesh.n_faces))
        regions = np.zeros(n, dtype=int)

        path = write_vtk(
            tmp_path / "u.vtk", mesh, field, 2 * field.cell_values, regions
        )

        sections, lines = vtk_sections(path)
        assert lines[0] == "# vtk DataFile Version 2.0"
        assert sections["POINTS"] == f"POINTS {8 * n} double"
        assert sections["CELLS"] == f"CELLS {n} {9 * n}"
        assert sections["CELL_DATA"] == f"CELL_DATA {n}"
        start = lines.index(f"CELL_TYPES {n}") + 1
        assert lines[start : start + n] == ["12"] * n
        assert "SCALARS beta_u double 1" in lines
        assert "SCALARS region int 1" in lines

    def test_quads(self, tmp_path) -> None:
        """Test that 2D cells are quads padded to z = 0."""
        mesh = build_box_mesh(((0.0, 1.0), (0.0, 1.0)), [2, 2])
        field = DiscreteField.zeros(mesh)

        regions = np.zeros(4, dtype=int)

        path = write_vtk(tmp_path / "u.vtk", mesh, field, field.cell_values, regions)

        sections, lines = vtk_sections(path)
        assert sections["POINTS"] == "POINTS 16 double"
        first = lines.index("POINTS 16 double") + 1
        assert lines[first] == "0 0 0"
        assert lines[lines.index("CELL_TYPES 4") + 1] == "9"

    def test_vertices_without_box_geometry(self, tmp_path) -> None:
        """Test that a mesh read from file is written as cell-point vertices."""
        path = tmp_path / "mesh.txt"
        write_mesh(build_box_mesh(SLAB, [2, 1, 1]), path)
        mesh = read_mesh(path)
        field = DiscreteField.zeros(mesh)

        regions = np.zeros(2, dtype=int)

        vtk = write_vtk(tmp_path / "u.vtk", mesh, field, field.cell_values, regions)

        sections, lines = vtk_sections(vtk)
        assert sections["POINTS"] == "POINTS 2 double"
        assert sections["CELLS"] == "CELLS 2 4"
        assert lines[lines.index("CELL_TYPES 2") + 1] == "1"
