"""Time grid, solver settings and run records."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.problem.hypotheses import time_step_admissible
from hybridfv.problem.spec import ProblemSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_n = n dt, dt = T / N.

    Attributes:
        final_time: T
        steps: N

    """

    final_time: float
    steps: int

    def __post_init__(self) -> None:
        """Validate the grid."""
        if not np.isfinite(self.final_time) or self.final_time <= 0:
            msg = f"Final time must be positive, got {self.final_time}"
            raise ValueError(msg)
        steps = self.steps
        if isinstance(steps, bool) or int(steps) != steps or steps < 1:
            msg = f"Number of time steps must be a positive integer, got {self.steps}"
            raise ValueError(msg)

    @property
    def dt(self) -> float:
        """Time step."""
        return self.final_time / self.steps

    @property
    def times(self) -> np.ndarray:
        """t_0, ..., t_N."""
        return np.arange(self.steps + 1) * self.dt

    def time(self, step: int) -> float:
        """Return t_n."""
        return step * self.dt

    def check_step(self, spec: ProblemSpec) -> bool:
        """Check dt < beta_ / F_ for a non-monotone reaction.

        Returns:
            True if the step is admissible (always for nondecreasing F);
            otherwise a warning is logged and False returned

        """
        if time_step_admissible(spec, self.dt):
            return True
        bound = spec.storage.lower_slope / spec.reaction.decrease_rate
        logger.warning(
            "Time step %.6g violates dt < beta_/F_ = %.6g; "
            "the discrete solution may not be unique",
            self.dt,
            bound,
        )
        return False

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {"T": self.final_time, "N": self.steps, "dt": self.dt}


@dataclass(frozen=True)
class NewtonConfig:
    """Settings of the per-step Newton solve.

    Attributes:
        atol: Absolute infinity-norm residual tolerance
        rtol: Tolerance relative to the residual of the initial guess
        max_iterations: Newton iterations before a step fails
        max_halvings: Damping factors tried are 1, 1/2, ..., 2^-max_halvings
        condense: Eliminate cell unknowns before the linear solve
        variable_switch: Use w_K = beta(u_K) as cell unknowns

    """

    atol: float = 1e-10
    rtol: float = 1e-12
    max_iterations: int = 50
    max_halvings: int = 8
    condense: bool = True
    variable_switch: bool = True

    def __post_init__(self) -> None:
        """Validate tolerances and iteration limits."""
        if self.atol <= 0 or self.rtol <= 0:
            msg = f"Tolerances must be positive, got atol={self.atol}, rtol={self.rtol}"
            raise ValueError(msg)
        if self.max_iterations < 1:
            msg = f"max_iterations must be at least 1, got {self.max_iterations}"
            raise ValueError(msg)
        if self.max_halvings < 0:
            msg = f"max_halvings must be non-negative, got {self.max_halvings}"
            raise ValueError(msg)

    @property
    def damping_factors(self) -> list[float]:
        """Step lengths tried by the line search, largest first."""
        return [0.5**k for k in range(self.max_halvings + 1)]

    def tolerance(self, initial_residual: float) -> float:
        """Stopping threshold max(atol, rtol ||r_0||_inf).

        ``r_0`` is the residual of the initial guess, the previous time
        level. The relative term only takes over once ||r_0||_inf exceeds
        atol / rtol.
        """
        return max(self.atol, self.rtol * initial_residual)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "atol": self.atol,
            "rtol": self.rtol,
            "max_iterations": self.max_iterations,
            "max_halvings": self.max_halvings,
            "condense": self.condense,
            "variable_switch": self.variable_switch,
        }


@dataclass
class StepDiagnostics:
    """Record of one accepted time step.

    Attributes:
        step: n
        time: t_n
        iterations: Newton iterations
        residual: Final residual infinity norm
        halvings: Damping halvings summed over the iterations
        conservation_defect: Largest |sum of total fluxes| over interior faces
        l2_norm: ||u^n||_L2
        gradient_norm: ||grad_D u^n||_L2
        beta_l2_norm: ||beta(u^n)||_L2

    """

    step: int
    time: float
    iterations: int
    residual: float
    halvings: int
    conservation_defect: float
    l2_norm: float
    gradient_norm: float
    beta_l2_norm: float

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "step": self.step,
            "time": self.time,
            "iterations": self.iterations,
            "residual": self.residual,
            "halvings": self.halvings,
            "conservation_defect": self.conservation_defect,
            "l2_norm": self.l2_norm,
            "gradient_norm": self.gradient_norm,
            "beta_l2_norm": self.beta_l2_norm,
        }


@dataclass
class SolverDiagnostics:
    """Per-step records and the a priori estimate accumulators.

    ``u_l2_max`` is ||u||_{L^inf(0,T;L^2)}, ``gradient_l2`` is
    ||grad_{D,dt} u||_{L^2(Q_T)} and ``beta_l2_max`` is
    ||beta(u)||_{L^inf(0,T;L^2)}, all over the accepted steps.
    """

    steps: list[StepDiagnostics] = field(default_factory=list)
    u_l2_max: float = 0.0
    gradient_l2_squared: float = 0.0
    beta_l2_max: float = 0.0

    def record(self, step: StepDiagnostics, dt: float) -> None:
        """Append a step and update the accumulators."""
        self.steps.append(step)
        self.u_l2_max = max(self.u_l2_max, step.l2_norm)
        self.gradient_l2_squared += dt * step.gradient_norm**2
        self.beta_l2_max = max(self.beta_l2_max, step.beta_l2_norm)

    @property
    def gradient_l2(self) -> float:
        """||grad_{D,dt} u||_{L^2(Q_T)}."""
        return float(np.sqrt(self.gradient_l2_squared))

    @property
    def total_iterations(self) -> int:
        """Newton iterations over all steps."""
        return sum(step.iterations for step in self.steps)

    @property
    def max_conservation_defect(self) -> float:
        """Largest interface conservation defect over all steps."""
        return max((step.conservation_defect for step in self.steps), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "steps": [step.to_dict() for step in self.steps],
            "u_l2_max": self.u_l2_max,
            "gradient_l2": self.gradient_l2,
            "beta_l2_max": self.beta_l2_max,
            "total_iterations": self.total_iterations,
            "max_conservation_defect": self.max_conservation_defect,
        }


@dataclass
class Snapshot:
    """Discrete solution at one time level."""

    step: int
    time: float
    field: DiscreteField

    def __repr__(self) -> str:
        """Return a short description."""
        return f"Snapshot(step={self.step}, time={self.time:.6g})"


@dataclass
class RunResult:
    """Field history and diagnostics of a run.

    Attributes:
        time_grid: Time grid of the run
        snapshots: u^0, ..., u^n for every accepted step
        diagnostics: Step records and estimate accumulators
        completed: Whether all N steps were accepted
        runtime: Wall-clock seconds spent in the time loop
        failure: Failure message of an aborted run

    """

    time_grid: TimeGrid
    snapshots: list[Snapshot] = field(default_factory=list)
    diagnostics: SolverDiagnostics = field(default_factory=SolverDiagnostics)
    completed: bool = False
    runtime: float = 0.0
    failure: str | None = None

    @property
    def final(self) -> DiscreteField:
        """Last accepted field."""
        return self.snapshots[-1].field

    @property
    def times(self) -> np.ndarray:
        """Times of the stored snapshots."""
        return np.array([snapshot.time for snapshot in self.snapshots])

    @property
    def history(self) -> list[DiscreteField]:
        """Stored fields in time order."""
        return [snapshot.field for snapshot in self.snapshots]

    def to_dict(self) -> dict[str, Any]:
        """Summarize the run (fields are not included)."""
        return {
            "time_grid": self.time_grid.to_dict(),
            "accepted_steps": len(self.snapshots) - 1,
            "completed": self.completed,
            "runtime": self.runtime,
            "failure": self.failure,
            "diagnostics": self.diagnostics.to_dict(),
        }
