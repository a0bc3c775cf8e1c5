"""Tests for the time loop."""

import numpy as np
import pytest

from hybridfv.exceptions import RunAborted
from hybridfv.mesh import build_box_mesh
from hybridfv.problem import exponential_solution, make_test1
from hybridfv.solver import HybridSolver, NewtonConfig, TimeGrid, initialize, run
from tests.solver.helpers import custom_problem, slab_problem, square_mesh


class TestInitialize:
    """Tests for initialize."""

    def test_initial_field(self) -> None:
        """Test cell values, Dirichlet faces and interior face means."""
        spec = make_test1()
        mesh = build_box_mesh(spec.domain, [4, 2, 2])

        field = initialize(mesh, spec)

        np.testing.assert_allclose(
            field.cell_values, exponential_solution(mesh.cell_centers, 0.0)
        )
        boundary = mesh.boundary_faces
        np.testing.assert_allclose(
            field.face_values[boundary],
            exponential_solution(mesh.face_centers[boundary], 0.0),
        )
        for face in mesh.interior_faces[:5]:
            left, right = mesh.face_cells[face]
            mean = 0.5 * (field.cell_values[left] + field.cell_values[right])
            assert field.face_values[face] == pytest.approx(mean)


class TestHybridSolver:
    """Tests for HybridSolver.run."""

    def test_steady_affine_solution_is_kept(self) -> None:
        """Test that a steady affine solution is reproduced without iterating."""
        spec = custom_problem(
            initial="x1 + 2*x2", exact="x1 + 2*x2", source="0", dirichlet=None
        )
        mesh = square_mesh()

        result = HybridSolver(mesh, spec, TimeGrid(1.0, 3)).run()

        assert result.completed
        assert result.diagnostics.total_iterations == 0
        centers = mesh.cell_centers
        np.testing.assert_allclose(
            result.final.cell_values, centers[:, 0] + 2 * centers[:, 1], atol=1e-12
        )

    def test_records_every_step(self) -> None:
        """Test snapshots, times and the step callback."""
        spec, mesh = slab_problem()
        seen = []

        result = HybridSolver(mesh, spec, TimeGrid(0.1, 2)).run(callback=seen.append)

        assert result.completed
        assert result.failure is None
        assert len(result.snapshots) == 3
        np.testing.assert_allclose(result.times, [0.0, 0.05, 0.1])
        assert [step.step for step in seen] == [1, 2]
        assert result.diagnostics.steps == seen
        assert result.runtime >= 0.0

    def test_conservation_defect_below_residual(self) -> None:
        """Test that interface flux balance holds to the Newton tolerance."""
        spec = make_test1()
        mesh = build_box_mesh(spec.domain, [4, 2, 2])

        result = HybridSolver(mesh, spec, TimeGrid(0.1, 2)).run()

        for step in result.diagnostics.steps:
            assert step.conservation_defect <= step.residual + 1e-14

    def test_condensation_does_not_change_solution(self) -> None:
        """Test that runs with and without condensation agree."""
        spec, mesh = slab_problem()
        grid = TimeGrid(0.1, 2)

        condensed = HybridSolver(mesh, spec, grid, NewtonConfig(condense=True)).run()
        direct = HybridSolver(mesh, spec, grid, NewtonConfig(condense=False)).run()

        np.testing.assert_allclose(
            condensed.final.cell_values, direct.final.cell_values, atol=1e-10
        )
        np.testing.assert_allclose(
            condensed.final.face_values, direct.final.face_values, atol=1e-10
        )

    @pytest.mark.parametrize("problem", ["custom", "test1"])
    def test_variable_switch_does_not_change_solution(self, problem) -> None:
        """Test that both choices of cell unknowns solve the same discrete equations."""
        if problem == "custom":
            spec, mesh = custom_problem(velocity=[1.0, 0.5]), square_mesh()
        else:
            spec, mesh = slab_problem()
        grid = TimeGrid(0.1, 2)

        switched = HybridSolver(
            mesh, spec, grid, NewtonConfig(variable_switch=True)
        ).run()
        direct = HybridSolver(
            mesh, spec, grid, NewtonConfig(variable_switch=False)
        ).run()

        np.testing.assert_allclose(
            switched.final.cell_values, direct.final.cell_values, atol=1e-9
        )

    def test_aborted_run_keeps_accepted_steps(self) -> None:
        """Test that a failed step raises RunAborted with the partial result."""
        spec, mesh = slab_problem()
        config = NewtonConfig(atol=1e-300, rtol=1e-300, max_iterations=1)

        with pytest.raises(RunAborted) as excinfo:
            HybridSolver(mesh, spec, TimeGrid(0.1, 2), config).run()

        result = excinfo.value.result
        assert not result.completed
        assert len(result.snapshots) == 1
        assert "Step 1" in result.failure

    def test_initial_field_of_wrong_size(self) -> None:
        """Test that an initial field from another mesh raises ValueError."""
        spec, mesh = slab_problem()
        other = initialize(build_box_mesh(spec.domain, [4, 2, 2]), spec)

        with pytest.raises(ValueError, match="does not match mesh"):
            HybridSolver(mesh, spec, TimeGrid(0.1, 2)).run(initial=other)

    def test_diagnostic_norms(self) -> None:
        """Test that the recorded norms are positive for a non-zero solution."""
        spec, mesh = slab_problem()

        result = run(mesh, spec, TimeGrid(0.1, 2))

        last = result.diagnostics.steps[-1]
        assert last.l2_norm > 0
        assert last.beta_l2_norm > last.l2_norm
        assert result.diagnostics.gradient_l2 > 0
