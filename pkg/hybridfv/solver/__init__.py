"""Implicit time stepping.

Contains:
- TimeGrid, NewtonConfig: time discretization and Newton settings
- NonlinearSystem, assemble_residual: per-step residual and Jacobian
- newton_step, condense: damped Newton with optional static condensation
- HybridSolver, initialize, run: the time loop
"""

from hybridfv.solver.engine import HybridSolver, initialize, run
from hybridfv.solver.newton import (
    CondensedSystem,
    NewtonResult,
    condense,
    newton_step,
    solve_sparse,
)
from hybridfv.solver.state import (
    NewtonConfig,
    RunResult,
    Snapshot,
    SolverDiagnostics,
    StepDiagnostics,
    TimeGrid,
)
from hybridfv.solver.system import NonlinearSystem, assemble_residual

__all__ = [
    "CondensedSystem",
    "HybridSolver",
    "NewtonConfig",
    "NewtonResult",
    "NonlinearSystem",
    "RunResult",
    "Snapshot",
    "SolverDiagnostics",
    "StepDiagnostics",
    "TimeGrid",
    "assemble_residual",
    "condense",
    "initialize",
    "newton_step",
    "run",
    "solve_sparse",
]
