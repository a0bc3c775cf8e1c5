"""Tests for error metrics and front tracking."""

import dataclasses

import numpy as np
import pytest

from hybridfv.discretization import DiscreteField, project
from hybridfv.mesh import build_box_mesh
from hybridfv.problem import exponential_solution, make_test1, make_test2
from hybridfv.solver import RunResult, Snapshot, TimeGrid
from hybridfv.verification import (
    error_metric,
    error_report,
    exact_front,
    front_position,
    has_front,
    oscillation_report,
    snapshot_errors,
)

UNIT_CUBE = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


def scaled_exact(mesh, spec, t, factor=1.0):
    """Projection of factor * u(., t)."""
    return project(mesh, lambda x: factor * spec.exact(x, t))


def exact_run(mesh, spec, times):
    """Run result whose snapshots are the exact solution."""
    grid = TimeGrid(times[-1], len(times) - 1)
    result = RunResult(time_grid=grid, completed=True, runtime=0.5)
    for step, t in enumerate(times):
        field = scaled_exact(mesh, spec, t)
        result.snapshots.append(Snapshot(step=step, time=t, field=field))
    return result


@pytest.fixture
def slab():
    """First problem with a 4x2x2 mesh."""
    spec = make_test1()
    return spec, build_box_mesh(spec.domain, [4, 2, 2])


@pytest.fixture
def channel():
    """Travelling-wave problem with 20 cells along x1."""
    return make_test2(), build_box_mesh(UNIT_CUBE, [20, 1, 1])


class TestSnapshotErrors:
    """Tests for snapshot_errors and error_metric."""

    def test_relative_error(self, slab) -> None:
        """Test that 1.1 u has relative error 0.1."""
        spec, mesh = slab
        history = [scaled_exact(mesh, spec, 0.5, 1.1)]

        errors, absolute = snapshot_errors(mesh, history, np.array([0.5]), spec.exact)

        assert errors[0] == pytest.approx(0.1)
        assert not absolute[0]

    def test_zero_exact_solution(self, caplog) -> None:
        """Test that a vanishing exact solution gives an absolute error."""
        mesh = build_box_mesh(UNIT_CUBE, [2, 2, 2])
        history = [DiscreteField.constant(mesh, 0.2)]

        errors, absolute = snapshot_errors(
            mesh, history, np.array([1.0]), lambda x, t: np.zeros(len(x))
        )

        assert errors[0] == pytest.approx(0.2)
        assert absolute[0]
        assert "absolute error" in caplog.text

    def test_length_mismatch(self, slab) -> None:
        """Test that history and times must have the same length."""
        spec, mesh = slab

        with pytest.raises(ValueError, match="2 times"):
            snapshot_errors(
                mesh, [scaled_exact(mesh, spec, 0.0)], np.array([0.0, 1.0]), spec.exact
            )

    def test_initial_level_excluded(self, slab) -> None:
        """Test that Err ignores t_0."""
        spec, mesh = slab
        history = [
            scaled_exact(mesh, spec, 0.0, 2.0),
            scaled_exact(mesh, spec, 0.5, 1.1),
        ]

        err = error_metric(history, spec.exact, mesh, np.array([0.0, 0.5]))
        assert err == pytest.approx(0.1)

    def test_time_grid(self, slab) -> None:
        """Test that a time grid supplies the snapshot times."""
        spec, mesh = slab
        history = [scaled_exact(mesh, spec, t, 1.05) for t in (0.0, 0.5, 1.0)]

        err = error_metric(history, exponential_solution, mesh, TimeGrid(1.0, 2))
        assert err == pytest.approx(0.05)


class TestFront:
    """Tests for the front position of the travelling wave."""

    def test_exact_front(self) -> None:
        """Test that the front is at v t + p."""
        assert exact_front(make_test2(), 0.5) == pytest.approx(0.6)

    def test_no_front(self) -> None:
        """Test that a problem without v and p has no front."""
        assert has_front(make_test2())
        assert not has_front(make_test1())
        with pytest.raises(ValueError, match="no travelling front"):
            exact_front(make_test1(), 0.5)

    def test_front_position(self, channel) -> None:
        """Test that the last wet cell point lies within one cell of the front."""
        spec, mesh = channel

        position = front_position(scaled_exact(mesh, spec, 0.5), mesh)

        assert position == pytest.approx(0.575)
        assert abs(position - 0.6) <= 0.05

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.5])
    def test_invalid_threshold(self, channel, threshold) -> None:
        """Test that thresholds outside (0, 1) raise ValueError."""
        spec, mesh = channel

        with pytest.raises(ValueError, match="threshold"):
            front_position(scaled_exact(mesh, spec, 0.5), mesh, threshold)

    def test_dry_field(self, channel) -> None:
        """Test that a field without wet cells raises ValueError."""
        _, mesh = channel

        with pytest.raises(ValueError, match="No cell value"):
            front_position(DiscreteField.zeros(mesh), mesh)


class TestReports:
    """Tests for error_report and oscillation_report."""

    def test_error_report_of_exact_run(self, channel) -> None:
        """Test Err, mesh counts and front error for exact snapshots."""
        spec, mesh = channel

        report = error_report(exact_run(mesh, spec, [0.0, 0.25, 0.5]), mesh, spec)

        assert report.err == pytest.approx(0.0, abs=1e-14)
        assert report.elements == 20
        assert report.faces == mesh.n_faces
        assert report.h > 0
        assert report.runtime == 0.5
        assert report.front_error == pytest.approx(0.025)
        assert report.to_dict()["Err"] == report.err

    def test_error_report_without_front(self, slab) -> None:
        """Test that the first problem has no front error."""
        spec, mesh = slab

        report = error_report(exact_run(mesh, spec, [0.0, 0.5]), mesh, spec)

        assert report.front_error is None
        assert report.times.tolist() == [0.0, 0.5]

    def test_error_report_needs_exact(self, slab) -> None:
        """Test that a problem without exact solution raises ValueError."""
        spec, mesh = slab
        result = exact_run(mesh, spec, [0.0, 0.5])

        with pytest.raises(ValueError, match="no exact solution"):
            error_report(result, mesh, dataclasses.replace(spec, exact=None))

    def test_oscillations(self) -> None:
        """Test undershoot and overshoot against [0, 1]."""
        history = [
            DiscreteField(np.array([0.0, 0.5]), np.zeros(3)),
            DiscreteField(np.array([-0.01, 1.02]), np.zeros(3)),
        ]

        report = oscillation_report(history, lower=0.0, upper=1.0)

        assert report.minimum == -0.01
        assert report.maximum == 1.02
        assert report.undershoot == pytest.approx(0.01)
        assert report.overshoot == pytest.approx(0.02)

    def test_oscillations_without_upper_bound(self) -> None:
        """Test that no overshoot is reported without an upper bound."""
        report = oscillation_report([DiscreteField(np.array([5.0]), np.zeros(1))])

        assert report.overshoot == 0.0
        assert report.to_dict()["upper"] is None
