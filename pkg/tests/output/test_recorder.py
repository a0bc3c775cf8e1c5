"""Tests for the RunRecorder class and run record save/load functionality."""

import numpy as np
import pytest

from hybridfv.mesh import build_box_mesh
from hybridfv.output import (
    RunRecorder,
    load_run_record,
    package_versions,
    save_run_record,
)
from hybridfv.problem import make_test1
from hybridfv.solver import HybridSolver, RunResult, StepDiagnostics, TimeGrid


def make_step(step=1):
    """Step record of a converged step."""
    return StepDiagnostics(
        step=step,
        time=0.1 * step,
        iterations=3,
        residual=1e-11,
        halvings=1,
        conservation_defect=1e-12,
        l2_norm=0.4,
        gradient_norm=1.5,
        beta_l2_norm=0.9,
    )


class TestRunRecorder:
    """Tests for the RunRecorder class."""

    def test_initialization(self) -> None:
        """Test that recorder initializes with empty state."""
        recorder = RunRecorder()
        assert recorder.events == []
        assert recorder.metadata == {}
        assert recorder.start_time is None

    def test_start_run(self) -> None:
        """Test recording the run start with configuration and seeds."""
        recorder = RunRecorder()
        recorder.start_run(
            config={"time": {"T": 1.0, "N": 50}},
            problem={"name": "test1"},
            seeds={"refine_seed": 2011},
        )

        assert len(recorder.events) == 1
        event = recorder.events[0]
        assert event["type"] == "run_start"
        assert "timestamp" in event

        # Check metadata
        assert recorder.metadata["config"]["time"]["N"] == 50
        assert recorder.metadata["problem"]["name"] == "test1"
        assert recorder.metadata["seeds"] == {"refine_seed": 2011}
        assert recorder.metadata["mesh"] == {}
        assert recorder.metadata["versions"]["hybridfv"]

    def test_record_step(self) -> None:
        """Test recording an accepted time step."""
        recorder = RunRecorder()
        recorder.record_step(make_step(2))

        event = recorder.events[0]
        assert event["type"] == "step"
        assert event["data"]["step"] == 2
        assert event["data"]["iterations"] == 3
        assert event["data"]["halvings"] == 1

    def test_record_event(self) -> None:
        """Test recording a free-form event."""
        recorder = RunRecorder()
        recorder.record_event("artifacts", {"files": ["errors.csv"]})

        assert recorder.events[0]["type"] == "artifacts"
        assert recorder.events[0]["data"]["files"] == ["errors.csv"]

    def test_end_run(self) -> None:
        """Test that the run end carries the summary and the estimates."""
        recorder = RunRecorder()
        recorder.start_run(config={})
        result = RunResult(time_grid=TimeGrid(1.0, 10), completed=True)
        result.diagnostics.record(make_step(1), 0.1)

        recorder.end_run(result)

        summary = recorder.metadata["result"]
        assert summary["completed"]
        assert summary["u_l2_max"] == 0.4
        assert summary["beta_l2_max"] == 0.9
        assert summary["gradient_l2"] == pytest.approx(np.sqrt(0.1) * 1.5)
        assert summary["duration_seconds"] >= 0
        assert "diagnostics" not in summary
        assert recorder.events[-1]["type"] == "run_end"

    def test_clear(self) -> None:
        """Test clearing recorder state."""
        recorder = RunRecorder()
        recorder.start_run(config={})
        recorder.record_step(make_step())

        recorder.clear()

        assert recorder.events == []
        assert recorder.metadata == {}
        assert recorder.start_time is None

    def test_solver_records_every_step(self) -> None:
        """Test that a solver with a recorder logs start, steps and end."""
        spec = make_test1()
        mesh = build_box_mesh(spec.domain, [2, 1, 1])
        recorder = RunRecorder()
        recorder.start_run(config={})

        HybridSolver(mesh, spec, TimeGrid(0.1, 2), recorder=recorder).run()

        types = [event["type"] for event in recorder.events]
        assert types == ["run_start", "step", "step", "run_end"]


class TestSaveLoadRunRecord:
    """Tests for save_run_record and load_run_record functions."""

    def test_save_and_load(self, tmp_path) -> None:
        """Test saving and loading a run record with numpy values."""
        recorder = RunRecorder()
        recorder.start_run(
            config={"mesh": {"resolution": np.array([6, 3, 3])}},
            seeds={"refine_seed": np.int64(7)},
        )
        recorder.record_event("zero_flux", {"sides": frozenset({"x2+", "x2-"})})

        path = tmp_path / "runs" / "deep" / "metadata.json"
        save_run_record(recorder, path)
        loaded = load_run_record(path)

        assert path.exists()
        assert loaded["metadata"]["config"]["mesh"]["resolution"] == [6, 3, 3]
        assert loaded["metadata"]["seeds"]["refine_seed"] == 7
        assert loaded["events"][1]["data"]["sides"] == ["x2+", "x2-"]

    def test_unserializable_value(self, tmp_path) -> None:
        """Test that objects without a JSON form raise TypeError."""
        recorder = RunRecorder()
        recorder.record_event("bad", {"value": object()})

        with pytest.raises(TypeError, match="not JSON serializable"):
            save_run_record(recorder, tmp_path / "bad.json")

    def test_load_nonexistent_file(self, tmp_path) -> None:
        """Test loading a file that doesn't exist."""
        with pytest.raises(FileNotFoundError):
            load_run_record(tmp_path / "missing.json")

    def test_package_versions(self) -> None:
        """Test that the numerical stack versions are reported."""
        versions = package_versions()

        assert set(versions) == {"hybridfv", "python", "numpy", "scipy", "click"}
