"""Tests for box mesh generation and random nonmatching refinement."""

import dataclasses

import numpy as np
import pytest

from hybridfv.exceptions import MeshError
from hybridfv.mesh import (
    NO_CELL,
    build_box_mesh,
    generate_mesh,
    refine_random,
    validate,
)

SLAB = ((0.0, 2.0), (0.0, 1.0), (0.0, 1.0))


def refine_exactly_one(mesh):
    """Find a seed that refines exactly one cell of a two-cell mesh."""
    for seed in range(200):
        refined = refine_random(mesh, 0.5, seed)
        if refined.n_cells == mesh.n_cells + 7:
            return refined
    pytest.fail("No seed refined exactly one cell")


class TestBuildBoxMesh:
    """Tests for build_box_mesh."""

    def test_counts_3d(self) -> None:
        """Test that a 4x2x2 box has 16 cells, 28 interior and 40 boundary faces."""
        mesh = build_box_mesh(SLAB, [4, 2, 2])

        assert mesh.dim == 3
        assert mesh.n_cells == 16
        assert mesh.n_faces == 68
        assert mesh.interior_faces.size == 28
        assert mesh.boundary_faces.size == 40
        assert mesh.total_volume == pytest.approx(2.0)

    def test_counts_2d(self) -> None:
        """Test that a 2x2 square has 4 cells and 12 faces."""
        mesh = build_box_mesh(((0.0, 1.0), (0.0, 1.0)), [2, 2])

        assert mesh.dim == 2
        assert mesh.n_cells == 4
        assert mesh.n_faces == 12
        assert np.allclose(mesh.face_areas, 0.5)

    def test_axis_zero_varies_fastest(self) -> None:
        """Test that cell numbering runs along x1 first."""
        mesh = build_box_mesh(SLAB, [4, 2, 2])

        np.testing.assert_allclose(mesh.cell_centers[0], [0.25, 0.25, 0.25])
        np.testing.assert_allclose(mesh.cell_centers[1], [0.75, 0.25, 0.25])
        np.testing.assert_allclose(mesh.cell_centers[4], [0.25, 0.75, 0.25])

    def test_every_cell_has_six_faces(self) -> None:
        """Test that a conforming hexahedral mesh has six faces per cell."""
        mesh = build_box_mesh(SLAB, [3, 2, 2])

        assert all(len(mesh.cell_faces(k)) == 6 for k in range(mesh.n_cells))

    def test_boundary_faces_have_one_cell(self) -> None:
        """Test that boundary faces carry NO_CELL in their second column."""
        mesh = build_box_mesh(SLAB, [2, 1, 1])

        assert np.all(mesh.face_cells[mesh.boundary_faces, 1] == NO_CELL)
        assert np.all(mesh.face_cells[mesh.interior_faces, 1] >= 0)
        assert mesh.face(int(mesh.boundary_faces[0])).is_boundary
        assert not mesh.face(int(mesh.interior_faces[0])).is_boundary

    def test_mesh_is_valid(self) -> None:
        """Test that a generated box mesh satisfies every invariant."""
        mesh = build_box_mesh(SLAB, [4, 2, 2])
        report = validate(mesh, 2.0)

        assert report.ok, report.violations

    def test_metadata(self) -> None:
        """Test that provenance is recorded."""
        mesh = build_box_mesh(SLAB, [2, 1, 1])

        assert mesh.metadata["generator"] == "box"
        assert mesh.metadata["resolution"] == [2, 1, 1]
        assert mesh.metadata["refinements"] == []

    @pytest.mark.parametrize(
        ("domain", "resolution"),
        [
            (SLAB, [0, 1, 1]),
            (SLAB, [2, 1]),
            (((0.0, 0.0), (0.0, 1.0)), [1, 1]),
            (((0.0, 1.0),), [1]),
        ],
    )
    def test_invalid_input(self, domain, resolution) -> None:
        """Test that degenerate boxes and bad resolutions raise MeshError."""
        with pytest.raises(MeshError):
            build_box_mesh(domain, resolution)


class TestRefineRandom:
    """Tests for refine_random."""

    def test_full_refinement_is_conforming(self) -> None:
        """Test that refining every cell gives the doubled box mesh."""
        coarse = build_box_mesh(SLAB, [2, 1, 1])
        fine = refine_random(coarse, 1.0, seed=0)
        reference = build_box_mesh(SLAB, [4, 2, 2])

        assert fine.n_cells == reference.n_cells
        assert fine.n_faces == reference.n_faces
        assert fine.total_volume == pytest.approx(2.0)

    def test_no_selection_returns_same_mesh(self) -> None:
        """Test that probability 0 leaves the mesh untouched."""
        mesh = build_box_mesh(SLAB, [2, 1, 1])

        assert refine_random(mesh, 0.0, seed=3) is mesh

    def test_one_refined_neighbour_makes_hanging_faces(self) -> None:
        """Test that a coarse cell next to a refined one sees four sub-faces."""
        mesh = refine_exactly_one(build_box_mesh(SLAB, [2, 1, 1]))

        assert mesh.n_cells == 9
        coarse = int(np.argmax(mesh.cell_volumes))
        assert len(mesh.cell_faces(coarse)) == 9
        interface = [f for f in mesh.cell_faces(coarse) if not mesh.boundary_mask[f]]
        assert len(interface) == 4
        np.testing.assert_allclose(mesh.face_areas[interface], 0.25)

    def test_nonmatching_mesh_is_valid(self) -> None:
        """Test that the nonmatching mesh keeps the geometric identities."""
        mesh = refine_exactly_one(build_box_mesh(SLAB, [2, 1, 1]))
        report = validate(mesh, 2.0)

        assert report.ok, report.violations
        assert report.quality.theta == pytest.approx(2.0 * np.sqrt(3.0))

    def test_refinement_record(self) -> None:
        """Test that the metadata lists the refinement pass."""
        mesh = build_box_mesh(SLAB, [2, 1, 1])
        refined = refine_random(mesh, 1.0, seed=11)

        record = refined.metadata["refinements"][-1]
        assert record == {"probability": 1.0, "seed": 11, "refined_cells": 2}

    def test_same_seed_same_mesh(self) -> None:
        """Test that refinement is reproducible from its seed."""
        first = generate_mesh(SLAB, [4, 2, 2], probability=0.3, seed=7)
        second = generate_mesh(SLAB, [4, 2, 2], probability=0.3, seed=7)

        assert first.n_cells == second.n_cells
        np.testing.assert_array_equal(first.cell_centers, second.cell_centers)
        np.testing.assert_array_equal(first.face_cells, second.face_cells)

    def test_invalid_probability(self) -> None:
        """Test that a probability outside [0, 1] raises ValueError."""
        mesh = build_box_mesh(SLAB, [2, 1, 1])

        with pytest.raises(ValueError, match="probability"):
            refine_random(mesh, 1.5, seed=0)

    def test_requires_lattice(self) -> None:
        """Test that meshes without box lattice cannot be refined."""
        mesh = dataclasses.replace(build_box_mesh(SLAB, [2, 1, 1]), lattice=None)

        with pytest.raises(MeshError):
            refine_random(mesh, 0.5, seed=0)


class TestGenerateMesh:
    """Tests for generate_mesh."""

    def test_zero_probability_is_conforming(self) -> None:
        """Test that no refinement happens with probability 0."""
        mesh = generate_mesh(SLAB, [4, 2, 2], probability=0.0, seed=1, passes=3)

        assert mesh.n_cells == 16
        assert mesh.metadata["refinements"] == []

    def test_passes_use_consecutive_seeds(self) -> None:
        """Test that refinement pass k uses seed + k."""
        mesh = generate_mesh(SLAB, [2, 1, 1], probability=1.0, seed=5, passes=2)

        assert [r["seed"] for r in mesh.metadata["refinements"]] == [5, 6]
        assert mesh.n_cells == 2 * 8 * 8

    def test_random_refinement_is_valid(self) -> None:
        """Test that a randomly refined mesh passes validation."""
        mesh = generate_mesh(SLAB, [4, 2, 2], probability=0.3, seed=2011)
        report = validate(mesh, 2.0)

        assert report.ok, report.violations
        refined = sum(r["refined_cells"] for r in mesh.metadata["refinements"])
        assert mesh.n_cells == 16 + 7 * refined

    def test_negative_passes(self) -> None:
        """Test that a negative number of passes raises ValueError."""
        with pytest.raises(ValueError, match="passes"):
            generate_mesh(SLAB, [2, 1, 1], probability=0.5, passes=-1)
