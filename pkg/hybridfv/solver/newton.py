"""Damped Newton iteration and static condensation of cell unknowns.

Each cell row depends only on its own cell unknown and the face unknowns
of that cell, so the cell-cell block of the Jacobian is diagonal and cell
unknowns can be eliminated cell by cell, leaving a face-only system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from hybridfv.exceptions import SolverError
from hybridfv.solver.state import NewtonConfig
from hybridfv.solver.system import NonlinearSystem

logger = logging.getLogger(__name__)


@dataclass
class NewtonResult:
    """Outcome of the Newton solve of one time step.

    Attributes:
        unknowns: Accepted unknown vector
        converged: Whether the stopping criterion was met
        iterations: Newton iterations performed
        residual: Final residual infinity norm
        initial_residual: Residual infinity norm of the initial guess
        tolerance: Stopping threshold used
        halvings: Damping halvings summed over the iterations
        history: Residual norm after each iteration, initial guess first

    """

    unknowns: np.ndarray
    converged: bool
    iterations: int
    residual: float
    initial_residual: float
    tolerance: float
    halvings: int = 0
    history: list[float] = field(default_factory=list)


@dataclass
class CondensedSystem:
    """Face-only Schur complement of a linear system with a diagonal cell block.

    With the matrix split as [[D, B], [C, E]] (cells first), the reduced
    matrix is S = E - C D^-1 B and cell values follow from
    x_c = D^-1 (r_c - B x_f).
    """

    n_cells: int
    pivots: np.ndarray
    cell_face: sp.csc_matrix
    face_cell: sp.csc_matrix
    reduced: sp.csc_matrix

    @property
    def n_faces(self) -> int:
        """Size of the reduced system."""
        return self.reduced.shape[0]

    def reduce_rhs(self, rhs: np.ndarray) -> np.ndarray:
        """Right-hand side of the reduced system."""
        cells, faces = rhs[: self.n_cells], rhs[self.n_cells :]
        return faces - self.face_cell @ (cells / self.pivots)

    def recover(self, rhs: np.ndarray, face_solution: np.ndarray) -> np.ndarray:
        """Back-substitute the cell values and return the full solution."""
        cells = (rhs[: self.n_cells] - self.cell_face @ face_solution) / self.pivots
        return np.concatenate([cells, face_solution])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve the full system through the reduced one."""
        face_solution = solve_sparse(self.reduced, self.reduce_rhs(rhs))
        return self.recover(rhs, face_solution)


def condense(matrix: sp.spmatrix, n_cells: int) -> CondensedSystem:
    """Eliminate the cell unknowns of a linear system.

    Args:
        matrix: Square matrix with the cell unknowns first
        n_cells: Number of cell unknowns

    Returns:
        CondensedSystem

    Raises:
        SolverError: If a cell pivot is zero or the cell block is not diagonal

    """
    matrix = sp.csc_matrix(matrix)
    cell_block = matrix[:n_cells, :n_cells]
    pivots = cell_block.diagonal()
    off_diagonal = cell_block - sp.diags(pivots)
    if off_diagonal.count_nonzero():
        msg = (
            "Cell block is not diagonal; "
            "cell unknowns cannot be eliminated cell by cell"
        )
        raise SolverError(msg)
    zero = np.flatnonzero(pivots == 0)
    if zero.size:
        msg = f"Zero pivot for cell {zero[0]}"
        raise SolverError(msg)

    cell_face = matrix[:n_cells, n_cells:]
    face_cell = matrix[n_cells:, :n_cells]
    face_face = matrix[n_cells:, n_cells:]
    reduced = face_face - face_cell @ sp.diags(1.0 / pivots) @ cell_face
    return CondensedSystem(
        n_cells=n_cells,
        pivots=pivots,
        cell_face=sp.csc_matrix(cell_face),
        face_cell=sp.csc_matrix(face_cell),
        reduced=sp.csc_matrix(reduced),
    )


def solve_sparse(matrix: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve a general sparse system by LU factorization.

    Raises:
        SolverError: If the matrix is singular or the solution is not finite

    """
    if matrix.shape[0] == 0:
        return np.zeros(0)
    try:
        solution = splu(sp.csc_matrix(matrix)).solve(np.asarray(rhs, dtype=float))
    except RuntimeError as e:
        msg = f"Linear system of size {matrix.shape[0]} is singular: {e}"
        raise SolverError(msg) from e
    if not np.all(np.isfinite(solution)):
        msg = f"Linear solve of size {matrix.shape[0]} produced non-finite values"
        raise SolverError(msg)
    return solution


def linear_solve(
    matrix: sp.spmatrix, rhs: np.ndarray, n_cells: int, condensed: bool
) -> np.ndarray:
    """Solve a Newton correction system, optionally through the Schur complement."""
    if condensed:
        return condense(matrix, n_cells).solve(rhs)
    return solve_sparse(matrix, rhs)


def newton_step(
    system: NonlinearSystem,
    initial: np.ndarray,
    previous_storage: np.ndarray,
    t: float,
    config: NewtonConfig,
) -> NewtonResult:
    """Solve one implicit time step by damped Newton iteration.

    Stops when ||r||_inf <= max(atol, rtol ||r_0||_inf). Each correction is
    scaled by the first factor 1, 1/2, ... that strictly decreases the
    residual norm; if none does, the smallest trial step is taken.

    Args:
        system: Step system
        initial: Initial guess (usually the previous time level)
        previous_storage: beta(u_K^{n-1}) per cell
        t: t_n
        config: Newton settings

    Returns:
        NewtonResult of the converged iteration

    Raises:
        SolverError: If the iteration does not converge within
            ``config.max_iterations`` or a linear solve fails

    """
    unknowns = np.asarray(initial, dtype=float).copy()
    residual = system.residual(unknowns, previous_storage, t)
    norm = _norm(residual)
    if not np.isfinite(norm):
        msg = f"Residual of the initial guess at t={t:.6g} is not finite"
        raise SolverError(msg)
    tolerance = config.tolerance(norm)
    history = [norm]
    halvings = 0

    iteration = 0
    while norm > tolerance:
        if iteration == config.max_iterations:
            msg = (
                f"Newton did not converge at t={t:.6g} in {iteration} iterations "
                f"(residual {norm:.3e}, tolerance {tolerance:.3e})"
            )
            raise SolverError(msg)
        iteration += 1
        jacobian = system.jacobian(unknowns, t)
        correction = linear_solve(jacobian, -residual, system.n_cells, config.condense)

        for halving, factor in enumerate(config.damping_factors):
            trial = unknowns + factor * correction
            trial_residual = system.residual(trial, previous_storage, t)
            trial_norm = _norm(trial_residual)
            if trial_norm < norm:
                break
        else:
            if not np.isfinite(trial_norm):
                msg = f"Newton trial steps at t={t:.6g} give non-finite residuals"
                raise SolverError(msg)
            logger.warning(
                "Damping exhausted at t=%.6g, iteration %d: "
                "accepting step %.3g with residual %.3e >= %.3e",
                t,
                iteration,
                factor,
                trial_norm,
                norm,
            )
        halvings += halving
        unknowns, residual, norm = trial, trial_residual, trial_norm
        history.append(norm)
        logger.debug(
            "t=%.6g iteration %d: residual %.3e, damping %.3g",
            t,
            iteration,
            norm,
            factor,
        )

    return NewtonResult(
        unknowns=unknowns,
        converged=True,
        iterations=iteration,
        residual=norm,
        initial_residual=history[0],
        tolerance=tolerance,
        halvings=halvings,
        history=history,
    )


def _norm(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    norm = float(np.max(np.abs(values)))
    return norm if np.isfinite(norm) else float("inf")
