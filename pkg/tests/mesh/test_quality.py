"""Tests for mesh validation and regularity measures."""

import dataclasses

import numpy as np
import pytest

from hybridfv.mesh import build_box_mesh, mesh_quality, validate
from hybridfv.mesh.quality import incidence_violations

SLAB = ((0.0, 2.0), (0.0, 1.0), (0.0, 1.0))


@pytest.fixture
def mesh():
    """Conforming 4x2x2 mesh of cubes with side 1/2."""
    return build_box_mesh(SLAB, [4, 2, 2])


class TestMeshQuality:
    """Tests for mesh_quality."""

    def test_cube_mesh(self, mesh) -> None:
        """Test h_D and theta_D of a mesh of equal cubes."""
        quality = mesh_quality(mesh)

        assert quality.h == pytest.approx(0.5 * np.sqrt(3.0))
        # diameter over half the side
        assert quality.theta == pytest.approx(2.0 * np.sqrt(3.0))

    def test_stretched_cells_raise_theta(self) -> None:
        """Test that anisotropic cells have a larger theta_D."""
        cubes = mesh_quality(build_box_mesh(SLAB, [4, 2, 2]))
        slabs = mesh_quality(build_box_mesh(SLAB, [16, 2, 2]))

        assert slabs.theta > cubes.theta

    def test_to_dict(self, mesh) -> None:
        """Test serialization of the quality record."""
        data = mesh_quality(mesh).to_dict()

        assert set(data) == {"h", "theta"}


class TestValidate:
    """Tests for validate."""

    def test_valid_mesh(self, mesh) -> None:
        """Test that a box mesh has no violations and small residuals."""
        report = validate(mesh, domain_measure=2.0)

        assert report.ok
        assert report.identity_residual.max() < 1e-12
        assert report.closure_residual.max() < 1e-12
        assert report.cone_sum_residual < 1e-12

    def test_cone_identity(self, mesh) -> None:
        """Test that sum m(sigma) d_K,sigma equals d times the total volume."""
        total = np.sum(mesh.face_areas[mesh.hf_face] * mesh.hf_distance)

        assert total == pytest.approx(mesh.dim * mesh.total_volume)

    def test_flipped_normal(self, mesh) -> None:
        """Test that a flipped face normal is flagged."""
        normals = mesh.face_normals.copy()
        face = int(mesh.interior_faces[0])
        normals[face] *= -1.0
        broken = dataclasses.replace(mesh, face_normals=normals)

        report = validate(broken)

        assert not report.ok
        assert any(v.startswith("normal") for v in report.violations)

    def test_non_unit_normal(self, mesh) -> None:
        """Test that a scaled normal is flagged."""
        normals = mesh.face_normals.copy()
        normals[0] *= 2.0
        report = validate(dataclasses.replace(mesh, face_normals=normals))

        assert "normal: face normal is not a unit vector" in report.violations

    def test_domain_cover(self, mesh) -> None:
        """Test that a wrong domain measure is reported."""
        report = validate(mesh, domain_measure=3.0)

        assert any(v.startswith("cover") for v in report.violations)

    def test_cell_without_faces(self, mesh) -> None:
        """Test that incidence errors short-circuit the geometric checks."""
        volumes = np.append(mesh.cell_volumes, 1.0)
        broken = dataclasses.replace(
            mesh,
            cell_volumes=volumes,
            cell_centers=np.vstack([mesh.cell_centers, [[5.0, 5.0, 5.0]]]),
            cell_diameters=np.append(mesh.cell_diameters, 1.0),
        )

        report = validate(broken)

        assert "incidence: cell without faces" in report.violations
        assert np.isnan(report.quality.h)

    def test_missing_cell_reference(self, mesh) -> None:
        """Test that a face pointing at a missing cell is reported."""
        cells = mesh.face_cells.copy()
        cells[0, 0] = mesh.n_cells + 4

        violations = incidence_violations(dataclasses.replace(mesh, face_cells=cells))

        assert violations == ["incidence: face references a missing cell"]

    def test_report_to_dict(self, mesh) -> None:
        """Test that the report serializes its maxima and violations."""
        data = validate(mesh).to_dict()

        assert data["violations"] == []
        assert data["max_identity_residual"] < 1e-12
        assert data["h"] == pytest.approx(0.5 * np.sqrt(3.0))
