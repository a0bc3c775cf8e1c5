"""Tests for the plain-text mesh format."""

import numpy as np
import pytest

from hybridfv.exceptions import MeshError
from hybridfv.mesh import generate_mesh, read_mesh, validate, write_mesh

SLAB = ((0.0, 2.0), (0.0, 1.0), (0.0, 1.0))


class TestMeshFile:
    """Tests for write_mesh and read_mesh."""

    def test_write_then_read(self, tmp_path) -> None:
        """Test that a refined mesh survives a write/read cycle bit for bit."""
        mesh = generate_mesh(SLAB, [4, 2, 2], probability=0.3, seed=2011)
        path = tmp_path / "meshes" / "slab.txt"

        write_mesh(mesh, path)
        loaded = read_mesh(path)

        assert loaded.n_cells == mesh.n_cells
        assert loaded.n_faces == mesh.n_faces
        np.testing.assert_array_equal(loaded.cell_centers, mesh.cell_centers)
        np.testing.assert_array_equal(loaded.face_cells, mesh.face_cells)
        np.testing.assert_array_equal(loaded.face_distances, mesh.face_distances)
        assert loaded.lattice is None
        assert loaded.metadata["generator"] == "file"
        assert validate(loaded, 2.0).ok

    def test_comments_and_blank_lines(self, tmp_path) -> None:
        """Test that comments and blank lines are ignored."""
        path = tmp_path / "interval.txt"
        path.write_text(
            "# two squares side by side\n"
            "2 2 7\n"
            "\n"
            "0.5 0.5 1 1.4142135623730951\n"
            "1.5 0.5 1 1.4142135623730951  # right cell\n"
            "1 0.5 1 0 1 1 0 0.5 0.5\n"
            "0 0.5 1 0 -1 0 0.5\n"
            "2 0.5 1 1 1 0 0.5\n"
            "0.5 0 1 0 0 -1 0.5\n"
            "0.5 1 1 0 0 1 0.5\n"
            "1.5 0 1 1 0 -1 0.5\n"
            "1.5 1 1 1 0 1 0.5\n"
        )

        mesh = read_mesh(path)

        assert mesh.dim == 2
        assert mesh.n_cells == 2
        assert mesh.interior_faces.tolist() == [0]
        assert validate(mesh, 2.0).ok

    def test_empty_file(self, tmp_path) -> None:
        """Test that an empty file is rejected."""
        path = tmp_path / "empty.txt"
        path.write_text("# nothing here\n")

        with pytest.raises(MeshError, match="empty mesh file"):
            read_mesh(path)

    def test_bad_header(self, tmp_path) -> None:
        """Test that a malformed header names its line."""
        path = tmp_path / "bad.txt"
        path.write_text("3 1\n")

        with pytest.raises(MeshError, match=r"bad.txt:1: header"):
            read_mesh(path)

    def test_missing_cell(self, tmp_path) -> None:
        """Test that a face referencing a missing cell is rejected."""
        path = tmp_path / "missing.txt"
        path.write_text("2 1 1\n0.5 0.5 1 1.4\n0 0.5 1 3 -1 0 0.5\n")

        with pytest.raises(MeshError, match="missing cell 3"):
            read_mesh(path)

    def test_non_positive_measure(self, tmp_path) -> None:
        """Test that a zero cell measure is rejected."""
        path = tmp_path / "flat.txt"
        path.write_text("2 1 1\n0.5 0.5 0 1.4\n0 0.5 1 0 -1 0 0.5\n")

        with pytest.raises(MeshError, match="non-positive cell measure"):
            read_mesh(path)

    def test_not_a_number(self, tmp_path) -> None:
        """Test that a non-numeric token names its line."""
        path = tmp_path / "nan.txt"
        path.write_text("2 1 1\n0.5 abc 1 1.4\n0 0.5 1 0 -1 0 0.5\n")

        with pytest.raises(MeshError, match=r"nan.txt:2: expected a number"):
            read_mesh(path)
