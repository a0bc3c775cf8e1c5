"""Nonlinear system of one implicit time step.

Unknowns are one value per cell followed by one value per face that is
not a Dirichlet face. With the variable switch on, the cell unknown is
w_K = beta(u_K) and u_K = phi(w_K); with it off, the cell unknown is u_K
itself. Face unknowns are always u_sigma.

Cell row K::

    m(K) (beta(u_K) - beta(u_K^{n-1}))
        + dt [sum_sigma F_K,sigma + V+ u_K + V- u_sigma] + dt m(K) (F(u_K) - q_K^n)

Face row sigma: sum of the total fluxes of the cells sharing sigma (one
cell on a zero-flux boundary face).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from hybridfv.discretization.fields import DiscreteField
from hybridfv.discretization.operator import CellOperator, total_fluxes
from hybridfv.mesh.geometry import Mesh
from hybridfv.problem.spec import BoundaryMode, ProblemSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CellState:
    """Storage and solution values of the cell unknowns with their derivatives."""

    storage: np.ndarray
    solution: np.ndarray
    storage_derivative: np.ndarray
    solution_derivative: np.ndarray


class NonlinearSystem:
    """Residual and Jacobian of the implicit step on a fixed mesh.

    Attributes:
        mesh: Mesh
        spec: Problem
        operator: Assembled local flux matrices and face velocities
        boundary: Boundary condition of every boundary face
        dt: Time step
        variable_switch: Whether cell unknowns are w_K = beta(u_K)
        face_unknowns: Faces carrying an unknown, in unknown order
        face_column: Position of each face among the face unknowns, -1 for
            Dirichlet faces

    """

    def __init__(
        self,
        mesh: Mesh,
        spec: ProblemSpec,
        operator: CellOperator,
        boundary: BoundaryMode,
        dt: float,
        variable_switch: bool = True,
    ) -> None:
        """Set up the unknown layout.

        Raises:
            ValueError: If dt is not positive

        """
        if dt <= 0:
            msg = f"Time step must be positive, got {dt}"
            raise ValueError(msg)
        self.mesh = mesh
        self.spec = spec
        self.operator = operator
        self.boundary = boundary
        self.dt = float(dt)
        self.variable_switch = variable_switch

        dirichlet = np.zeros(mesh.n_faces, dtype=bool)
        dirichlet[boundary.dirichlet_faces] = True
        self.dirichlet_faces = np.flatnonzero(dirichlet)
        self.face_unknowns = np.flatnonzero(~dirichlet)
        self.face_column = np.full(mesh.n_faces, -1, dtype=int)
        self.face_column[self.face_unknowns] = np.arange(self.face_unknowns.size)
        logger.debug(
            "Nonlinear system: %d cell and %d face unknowns "
            "(%d Dirichlet faces eliminated)",
            mesh.n_cells,
            self.face_unknowns.size,
            self.dirichlet_faces.size,
        )

    @property
    def n_cells(self) -> int:
        """Number of cell unknowns."""
        return self.mesh.n_cells

    @property
    def n_unknowns(self) -> int:
        """Size of the system."""
        return self.mesh.n_cells + self.face_unknowns.size

    def cell_state(self, cell_unknowns: np.ndarray) -> CellState:
        """Map cell unknowns to beta(u_K), u_K and their derivatives."""
        storage_law = self.spec.storage
        x = np.asarray(cell_unknowns, dtype=float)
        if self.variable_switch:
            return CellState(
                storage=x,
                solution=storage_law.inverse(x),
                storage_derivative=np.ones_like(x),
                solution_derivative=storage_law.inverse_derivative(x),
            )
        return CellState(
            storage=storage_law.beta(x),
            solution=x,
            storage_derivative=storage_law.derivative(x),
            solution_derivative=np.ones_like(x),
        )

    def storage(self, unknowns: np.ndarray) -> np.ndarray:
        """beta(u_K) per cell of an unknown vector."""
        return self.cell_state(unknowns[: self.n_cells]).storage

    def pack(self, field: DiscreteField) -> np.ndarray:
        """Build the unknown vector of a discrete field."""
        cells = field.cell_values
        if self.variable_switch:
            cells = self.spec.storage.beta(cells)
        return np.concatenate([cells, field.face_values[self.face_unknowns]])

    def unpack(self, unknowns: np.ndarray, t: float) -> DiscreteField:
        """Rebuild the discrete field, with Dirichlet faces at g(x_sigma, t)."""
        faces = np.empty(self.mesh.n_faces)
        faces[self.face_unknowns] = unknowns[self.n_cells :]
        faces[self.boundary.dirichlet_faces] = self.boundary.dirichlet_values(
            self.mesh, t
        )
        solution = self.cell_state(unknowns[: self.n_cells]).solution
        return DiscreteField(solution, faces)

    def source(self, t: float) -> np.ndarray:
        """q_K^n at the cell points and the midpoint of (t_{n-1}, t_n]."""
        midpoint = t - 0.5 * self.dt
        values = self.spec.source(self.mesh.cell_centers, midpoint)
        return np.asarray(values, dtype=float)

    def residual(
        self, unknowns: np.ndarray, previous_storage: np.ndarray, t: float
    ) -> np.ndarray:
        """See ``assemble_residual``."""
        return assemble_residual(self, unknowns, previous_storage, t)

    def jacobian(self, unknowns: np.ndarray, t: float) -> sp.csc_matrix:
        """Derivative of the residual with respect to the unknowns.

        Cell rows couple the own cell unknown and the face unknowns of the
        cell; face rows couple the adjacent cell unknowns and the face
        unknowns of the adjacent cells.
        """
        mesh, op = self.mesh, self.operator
        nc, dt = self.n_cells, self.dt
        state = self.cell_state(unknowns[:nc])
        reaction_slope = self.spec.reaction.derivative(state.solution)

        v_plus, v_minus = op.v_plus, op.v_minus
        # d(total flux of half-face)/d(u_K)
        outflow = op.row_sums + v_plus
        cell_outflow = np.bincount(mesh.hf_cell, weights=outflow, minlength=nc)

        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        values: list[np.ndarray] = []

        def add(r: np.ndarray, c: np.ndarray, v: np.ndarray) -> None:
            rows.append(r)
            cols.append(c)
            values.append(v)

        cells = np.arange(nc)
        diagonal = mesh.cell_volumes * state.storage_derivative + dt * (
            cell_outflow + mesh.cell_volumes * reaction_slope
        ) * state.solution_derivative
        add(cells, cells, diagonal)

        pair_face = self.face_column[mesh.hf_face[op.pair_col]]
        pair_target = self.face_column[mesh.hf_face[op.pair_row]]
        own_face = self.face_column[mesh.hf_face]

        # cell rows, face columns
        keep = pair_face >= 0
        add(op.pair_cell[keep], nc + pair_face[keep], -dt * op.pair_value[keep])
        keep = own_face >= 0
        add(mesh.hf_cell[keep], nc + own_face[keep], dt * v_minus[keep])

        # face rows, cell columns
        upwind = outflow * state.solution_derivative[mesh.hf_cell]
        add(nc + own_face[keep], mesh.hf_cell[keep], upwind[keep])

        # face rows, face columns
        both = (pair_target >= 0) & (pair_face >= 0)
        add(nc + pair_target[both], nc + pair_face[both], -op.pair_value[both])
        add(nc + own_face[keep], nc + own_face[keep], v_minus[keep])

        size = self.n_unknowns
        matrix = sp.coo_matrix(
            (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
            shape=(size, size),
        )
        return matrix.tocsc()

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"NonlinearSystem(cells={self.n_cells}, faces={self.face_unknowns.size}, "
            f"switch={self.variable_switch})"
        )


def assemble_residual(
    system: NonlinearSystem,
    unknowns: np.ndarray,
    previous_storage: np.ndarray,
    t: float,
) -> np.ndarray:
    """Residual of the implicit step ending at t.

    Args:
        system: Step system
        unknowns: Candidate unknown vector at t_n
        previous_storage: beta(u_K^{n-1}) per cell
        t: t_n

    Returns:
        Cell rows followed by face rows

    """
    mesh = system.mesh
    nc = system.n_cells
    state = system.cell_state(unknowns[:nc])
    field = system.unpack(unknowns, t)
    fluxes = total_fluxes(system.operator, field)

    outflow = np.bincount(mesh.hf_cell, weights=fluxes, minlength=nc)
    reaction = system.spec.reaction.function(state.solution)
    cell_rows = mesh.cell_volumes * (state.storage - previous_storage) + system.dt * (
        outflow + mesh.cell_volumes * (reaction - system.source(t))
    )
    face_balance = np.bincount(mesh.hf_face, weights=fluxes, minlength=mesh.n_faces)
    face_rows = face_balance[system.face_unknowns]
    return np.concatenate([cell_rows, face_rows])
