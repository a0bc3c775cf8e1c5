"""Fully implicit time stepping of the hybrid finite volume scheme."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from typing import TYPE_CHECKING

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.discretization.forms import gradient_norm, l2_norm
from hybridfv.discretization.operator import assemble_cell_operator, face_flux_balance
from hybridfv.exceptions import RunAborted, SolverError
from hybridfv.mesh.geometry import Mesh
from hybridfv.problem.spec import BoundaryMode, ProblemSpec, boundary_modes
from hybridfv.solver.newton import newton_step
from hybridfv.solver.state import (
    NewtonConfig,
    RunResult,
    Snapshot,
    SolverDiagnostics,
    StepDiagnostics,
    TimeGrid,
)
from hybridfv.solver.system import NonlinearSystem

if TYPE_CHECKING:
    from hybridfv.output.recorder import RunRecorder

logger = logging.getLogger(__name__)

StepCallback = Callable[[StepDiagnostics], None]


def initialize(
    mesh: Mesh, spec: ProblemSpec, boundary: BoundaryMode | None = None
) -> DiscreteField:
    """Build u^0.

    Cell values are u_0 at the cell points (one-point rule for the cell
    mean). Dirichlet faces take g(x_sigma, 0); every other face takes the
    mean of its adjacent cell values.

    Args:
        mesh: Mesh
        spec: Problem
        boundary: Boundary assignment, computed from the problem if None

    Returns:
        Initial discrete field

    """
    boundary = boundary_modes(mesh, spec) if boundary is None else boundary
    cells = np.asarray(spec.initial(mesh.cell_centers), dtype=float)
    counts = np.bincount(mesh.hf_face, minlength=mesh.n_faces)
    sums = np.bincount(
        mesh.hf_face, weights=cells[mesh.hf_cell], minlength=mesh.n_faces
    )
    faces = sums / counts
    faces[boundary.dirichlet_faces] = boundary.dirichlet_values(mesh, 0.0)
    return DiscreteField(cells, faces)


class HybridSolver:
    """Time loop for one problem on one mesh.

    The flux matrices, face velocities and boundary assignment are built
    once; every step solves the nonlinear system by damped Newton from the
    previous time level.
    """

    def __init__(
        self,
        mesh: Mesh,
        spec: ProblemSpec,
        time_grid: TimeGrid,
        config: NewtonConfig | None = None,
        alpha: float | None = None,
        recorder: RunRecorder | None = None,
    ) -> None:
        """Assemble the operators of a run.

        Args:
            mesh: Mesh of the domain
            spec: Problem
            time_grid: Uniform time grid
            config: Newton settings (defaults if None)
            alpha: Stabilization parameter, sqrt(d) if None
            recorder: Optional RunRecorder receiving every accepted step

        Raises:
            ValueError: If the mesh does not fit the problem or the
                coefficients are inadmissible

        """
        self.mesh = mesh
        self.spec = spec
        self.time_grid = time_grid
        self.config = config or NewtonConfig()
        self.alpha = alpha
        self.recorder = recorder

        self.boundary = boundary_modes(mesh, spec)
        self.operator = assemble_cell_operator(
            mesh,
            spec.cell_diffusion(mesh),
            spec.cell_velocity(mesh),
            alpha,
        )
        self.system = NonlinearSystem(
            mesh,
            spec,
            self.operator,
            self.boundary,
            time_grid.dt,
            variable_switch=self.config.variable_switch,
        )
        self.interior_faces = mesh.interior_faces

    def initialize(self) -> DiscreteField:
        """Return u^0 of this run."""
        return initialize(self.mesh, self.spec, self.boundary)

    def conservation_defect(self, field: DiscreteField) -> float:
        """Largest interior-face flux imbalance.

        This is |F_K,sigma + V_K,sigma u + F_L,sigma + V_L,sigma u|.
        """
        if self.interior_faces.size == 0:
            return 0.0
        balance = face_flux_balance(self.operator, field)[self.interior_faces]
        return float(np.max(np.abs(balance)))

    def run(
        self,
        initial: DiscreteField | None = None,
        callback: StepCallback | None = None,
    ) -> RunResult:
        """Advance from t_0 to T.

        Args:
            initial: u^0, ``initialize`` if None
            callback: Called with the diagnostics of every accepted step

        Returns:
            RunResult with u^0, ..., u^N and the diagnostics

        Raises:
            RunAborted: If a step fails; ``result`` holds the accepted steps

        """
        grid = self.time_grid
        grid.check_step(self.spec)
        field = self.initialize() if initial is None else initial.copy()
        field.check(self.mesh)

        result = RunResult(time_grid=grid, diagnostics=SolverDiagnostics())
        result.snapshots.append(Snapshot(step=0, time=0.0, field=field))
        unknowns = self.system.pack(field)
        logger.info(
            "Running %s on %d cells / %d faces: T=%g, N=%d",
            self.spec.name,
            self.mesh.n_cells,
            self.mesh.n_faces,
            grid.final_time,
            grid.steps,
        )

        start = time.perf_counter()
        for step in range(1, grid.steps + 1):
            t = grid.time(step)
            previous_storage = self.system.storage(unknowns)
            try:
                newton = newton_step(
                    self.system, unknowns, previous_storage, t, self.config
                )
            except SolverError as e:
                result.runtime = time.perf_counter() - start
                result.failure = f"Step {step} (t={t:.6g}) failed: {e}"
                logger.error(result.failure)
                if self.recorder:
                    self.recorder.end_run(result)
                raise RunAborted(result.failure, result) from e

            unknowns = newton.unknowns
            field = self.system.unpack(unknowns, t)
            diagnostics = StepDiagnostics(
                step=step,
                time=t,
                iterations=newton.iterations,
                residual=newton.residual,
                halvings=newton.halvings,
                conservation_defect=self.conservation_defect(field),
                l2_norm=l2_norm(self.mesh, field.cell_values),
                gradient_norm=gradient_norm(self.mesh, field, self.alpha),
                beta_l2_norm=l2_norm(
                    self.mesh, self.spec.storage.beta(field.cell_values)
                ),
            )
            result.diagnostics.record(diagnostics, grid.dt)
            result.snapshots.append(Snapshot(step=step, time=t, field=field))
            logger.info(
                "Step %d/%d t=%.4g: %d Newton iterations, residual %.3e",
                step,
                grid.steps,
                t,
                newton.iterations,
                newton.residual,
            )
            if self.recorder:
                self.recorder.record_step(diagnostics)
            if callback:
                callback(diagnostics)

        result.completed = True
        result.runtime = time.perf_counter() - start
        if self.recorder:
            self.recorder.end_run(result)
        return result

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"HybridSolver(problem={self.spec.name!r}, "
            f"cells={self.mesh.n_cells}, N={self.time_grid.steps})"
        )


def run(
    mesh: Mesh,
    spec: ProblemSpec,
    time_grid: TimeGrid,
    config: NewtonConfig | None = None,
    alpha: float | None = None,
) -> RunResult:
    """Solve a problem on a mesh over a time grid; see ``HybridSolver.run``."""
    return HybridSolver(mesh, spec, time_grid, config, alpha).run()
