"""Error metrics against exact solutions and front tracking.

L2 norms use one-point quadrature at the cell points, consistent with the
piecewise constant reconstruction of the discrete solution.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.discretization.forms import l2_norm
from hybridfv.mesh.geometry import Mesh
from hybridfv.mesh.quality import mesh_quality
from hybridfv.problem.spec import ProblemSpec, SpaceTimeFunction
from hybridfv.solver.state import RunResult, TimeGrid

logger = logging.getLogger(__name__)

DEFAULT_FRONT_THRESHOLD = 1e-3


@dataclass
class ErrorReport:
    """Errors of one run against the exact solution.

    Attributes:
        err: Largest relative L2 error over t_1, ..., t_N
        times: Times of the compared snapshots
        errors: Relative (or absolute, see ``absolute``) L2 error per snapshot
        absolute: Snapshots whose exact norm vanished, reported as absolute errors
        h: Mesh size h_D
        elements: Number of cells
        faces: Number of faces
        runtime: Seconds spent in the time loop
        front_error: Largest |computed - exact| front position, for travelling fronts

    """

    err: float
    times: np.ndarray
    errors: np.ndarray
    absolute: np.ndarray
    h: float
    elements: int
    faces: int
    runtime: float = 0.0
    front_error: float | None = None

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "Err": self.err,
            "times": self.times.tolist(),
            "errors": self.errors.tolist(),
            "absolute": self.absolute.tolist(),
            "h": self.h,
            "elements": self.elements,
            "faces": self.faces,
            "runtime": self.runtime,
            "front_error": self.front_error,
        }


@dataclass
class OscillationReport:
    """Extreme cell values of a history.

    Attributes:
        minimum: Smallest u_K over all cells and times
        maximum: Largest u_K over all cells and times
        lower: Lower end of the exact range
        upper: Upper end of the exact range, None if unknown
        undershoot: max(0, lower - minimum)
        overshoot: max(0, maximum - upper), 0 if upper is unknown

    """

    minimum: float
    maximum: float
    lower: float = 0.0
    upper: float | None = None
    undershoot: float = 0.0
    overshoot: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "min": self.minimum,
            "max": self.maximum,
            "lower": self.lower,
            "upper": self.upper,
            "undershoot": self.undershoot,
            "overshoot": self.overshoot,
        }


def snapshot_errors(
    mesh: Mesh,
    history: Sequence[DiscreteField],
    times: np.ndarray,
    exact: SpaceTimeFunction,
) -> tuple[np.ndarray, np.ndarray]:
    """L2 error of each snapshot, relative to the exact L2 norm.

    Returns:
        (errors, absolute): where the exact norm is zero the absolute error is
        reported and ``absolute`` is True

    Raises:
        ValueError: If history and times differ in length

    """
    times = np.asarray(times, dtype=float)
    if len(history) != times.size:
        msg = f"History has {len(history)} fields but {times.size} times"
        raise ValueError(msg)
    errors = np.zeros(times.size)
    absolute = np.zeros(times.size, dtype=bool)
    for n, (field_n, t) in enumerate(zip(history, times, strict=True)):
        reference = np.asarray(exact(mesh.cell_centers, float(t)), dtype=float)
        difference = l2_norm(mesh, field_n.cell_values - reference)
        scale = l2_norm(mesh, reference)
        if scale > 0:
            errors[n] = difference / scale
        else:
            errors[n] = difference
            absolute[n] = True
            logger.warning(
                "Exact solution has zero L2 norm at t=%.6g; "
                "reporting the absolute error",
                t,
            )
    return errors, absolute


def error_metric(
    history: Sequence[DiscreteField],
    exact: SpaceTimeFunction,
    mesh: Mesh,
    times: np.ndarray | TimeGrid,
) -> float:
    """Err = max over t_n, n >= 1, of ||u_n - u(t_n)||_L2 / ||u(t_n)||_L2.

    Args:
        history: Discrete fields, one per entry of ``times``
        exact: Exact solution u(x, t)
        mesh: Mesh of the fields
        times: Snapshot times, or the run's time grid when the history
            holds every level t_0, ..., t_N

    Returns:
        Err; the level t_0 is excluded unless it is the only one

    """
    if isinstance(times, TimeGrid):
        stamps = times.times
    else:
        stamps = np.asarray(times, dtype=float)
    errors, _ = snapshot_errors(mesh, history, stamps, exact)
    return _largest_after_start(errors, stamps)


def exact_front(spec: ProblemSpec, t: float) -> float:
    """Front position v t + p of a travelling-wave problem.

    Raises:
        ValueError: If the problem has no ``v`` and ``p`` parameters

    """
    try:
        return float(spec.parameters["v"] * t + spec.parameters["p"])
    except KeyError as e:
        msg = f"Problem {spec.name} has no travelling front"
        raise ValueError(msg) from e


def front_position(
    field: DiscreteField,
    mesh: Mesh,
    threshold: float = DEFAULT_FRONT_THRESHOLD,
    axis: int = 0,
) -> float:
    """Largest cell-point coordinate along ``axis`` where u_K > threshold.

    Raises:
        ValueError: If the threshold is outside (0, 1) or no cell exceeds it

    """
    if not 0.0 < threshold < 1.0:
        msg = f"Front threshold must lie in (0, 1), got {threshold}"
        raise ValueError(msg)
    wet = field.cell_values > threshold
    if not wet.any():
        msg = f"No cell value exceeds the front threshold {threshold}"
        raise ValueError(msg)
    return float(mesh.cell_centers[wet, axis].max())


def front_track(
    result: RunResult,
    mesh: Mesh,
    spec: ProblemSpec,
    threshold: float = DEFAULT_FRONT_THRESHOLD,
) -> np.ndarray:
    """Rows (t, computed front, exact front) for every stored snapshot."""
    rows = [
        (
            snapshot.time,
            front_position(snapshot.field, mesh, threshold),
            exact_front(spec, snapshot.time),
        )
        for snapshot in result.snapshots
    ]
    return np.array(rows, dtype=float).reshape(-1, 3)


def has_front(spec: ProblemSpec) -> bool:
    """Whether a problem describes a front travelling along x1."""
    return {"v", "p"} <= spec.parameters.keys()


def oscillation_report(
    history: Sequence[DiscreteField],
    lower: float = 0.0,
    upper: float | None = None,
) -> OscillationReport:
    """Global extrema of the cell values and the excursions outside [lower, upper]."""
    values = np.concatenate([np.asarray(f.cell_values, dtype=float) for f in history])
    minimum, maximum = float(values.min()), float(values.max())
    return OscillationReport(
        minimum=minimum,
        maximum=maximum,
        lower=lower,
        upper=upper,
        undershoot=max(0.0, lower - minimum),
        overshoot=0.0 if upper is None else max(0.0, maximum - upper),
    )


def error_report(
    result: RunResult,
    mesh: Mesh,
    spec: ProblemSpec,
    threshold: float = DEFAULT_FRONT_THRESHOLD,
) -> ErrorReport:
    """Compare a run with the exact solution of its problem.

    Raises:
        ValueError: If the problem has no exact solution

    """
    if spec.exact is None:
        msg = f"Problem {spec.name} has no exact solution"
        raise ValueError(msg)
    times = result.times
    errors, absolute = snapshot_errors(mesh, result.history, times, spec.exact)
    err = _largest_after_start(errors, times)
    front_error = None
    if has_front(spec):
        track = front_track(result, mesh, spec, threshold)
        front_error = float(np.max(np.abs(track[:, 1] - track[:, 2])))
    return ErrorReport(
        err=err,
        times=times,
        errors=errors,
        absolute=absolute,
        h=mesh_quality(mesh).h,
        elements=mesh.n_cells,
        faces=mesh.n_faces,
        runtime=result.runtime,
        front_error=front_error,
    )


def _largest_after_start(errors: np.ndarray, times: np.ndarray) -> float:
    later = times > 0
    return float(errors[later].max() if later.any() else errors.max())
