"""Run recording.

Records the configuration, seeds, package versions and every accepted
time step of a run so that it can be reproduced and inspected later.
"""

from __future__ import annotations

import json
import platform
from datetime import datetime
from importlib import metadata
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from hybridfv import __version__

if TYPE_CHECKING:
    from hybridfv.solver.state import RunResult, StepDiagnostics


def package_versions() -> dict[str, str]:
    """Versions of the interpreter and the numerical stack."""
    return {
        "hybridfv": __version__,
        "python": platform.python_version(),
        **{name: _distribution_version(name) for name in ("numpy", "scipy", "click")},
    }


class RunRecorder:
    """Records run events for reproduction and analysis.

    Captures the run start (echoed configuration, seeds, versions), every
    accepted time step and the run end, each with a timestamp.
    """

    def __init__(self) -> None:
        """Initialize an empty recorder."""
        self.events: list[dict[str, Any]] = []
        self.metadata: dict[str, Any] = {}
        self.start_time: datetime | None = None

    def start_run(
        self,
        config: dict[str, Any],
        problem: dict[str, Any] | None = None,
        mesh: dict[str, Any] | None = None,
        seeds: dict[str, Any] | None = None,
    ) -> None:
        """Record the run start.

        Args:
            config: Fully defaulted run configuration
            problem: Problem description
            mesh: Mesh summary (sizes, quality, provenance)
            seeds: Random seeds used to build the mesh

        """
        self.start_time = datetime.now()
        self.metadata = {
            "config": config,
            "problem": problem or {},
            "mesh": mesh or {},
            "seeds": seeds or {},
            "versions": package_versions(),
            "start_time": self.start_time.isoformat(),
        }
        self._add_event("run_start", {"start_time": self.metadata["start_time"]})

    def record_step(self, step: StepDiagnostics) -> None:
        """Record an accepted time step."""
        self._add_event("step", step.to_dict())

    def record_event(self, event_type: str, data: dict[str, Any]) -> None:
        """Record a free-form event (e.g. written artifacts, errors)."""
        self._add_event(event_type, data)

    def end_run(self, result: RunResult) -> None:
        """Record the run end with its summary."""
        end_time = datetime.now()
        duration = 0
        if self.start_time:
            duration = (end_time - self.start_time).total_seconds()
        summary = result.to_dict()
        summary.pop("diagnostics", None)
        summary["u_l2_max"] = result.diagnostics.u_l2_max
        summary["gradient_l2"] = result.diagnostics.gradient_l2
        summary["beta_l2_max"] = result.diagnostics.beta_l2_max
        summary["end_time"] = end_time.isoformat()
        summary["duration_seconds"] = duration
        self.metadata["result"] = summary
        self._add_event("run_end", summary)

    def _add_event(self, event_type: str, data: dict[str, Any]) -> None:
        self.events.append(
            {
                "type": event_type,
                "timestamp": datetime.now().isoformat(),
                "data": data,
            }
        )

    def to_dict(self) -> dict[str, Any]:
        """Export the recording to a dictionary."""
        return {
            "metadata": self.metadata,
            "events": self.events,
        }

    def clear(self) -> None:
        """Clear all recorded events."""
        self.events.clear()
        self.metadata.clear()
        self.start_time = None


def save_run_record(recorder: RunRecorder, filepath: str | Path) -> None:
    """Save a run recording as JSON, creating parent directories."""
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with filepath.open("w") as f:
        json.dump(recorder.to_dict(), f, indent=2, default=_json_default)


def load_run_record(filepath: str | Path) -> dict[str, Any]:
    """Load a run recording.

    Returns:
        Dictionary with ``metadata`` and ``events``

    """
    with Path(filepath).open() as f:
        return json.load(f)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    msg = f"Object of type {type(value).__name__} is not JSON serializable"
    raise TypeError(msg)


def _distribution_version(name: str) -> str:
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return "unknown"
