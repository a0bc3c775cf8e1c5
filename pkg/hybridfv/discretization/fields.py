"""Discrete unknowns: one value per cell plus one value per face."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from hybridfv.mesh.geometry import Mesh


@dataclass(eq=False)
class DiscreteField:
    """Element of X_D.

    Attributes:
        cell_values: u_K, one per cell
        face_values: u_sigma, one per face
        boundary_constrained: Whether the field lies in X_D,0 (u_sigma = 0 on
            boundary faces)

    """

    cell_values: np.ndarray
    face_values: np.ndarray
    boundary_constrained: bool = False

    def __post_init__(self) -> None:
        """Store values as float arrays."""
        self.cell_values = np.asarray(self.cell_values, dtype=float)
        self.face_values = np.asarray(self.face_values, dtype=float)

    @classmethod
    def zeros(cls, mesh: Mesh) -> DiscreteField:
        """Create the zero field of a mesh."""
        return cls(
            np.zeros(mesh.n_cells), np.zeros(mesh.n_faces), boundary_constrained=True
        )

    @classmethod
    def constant(cls, mesh: Mesh, value: float) -> DiscreteField:
        """Create a field equal to ``value`` on every cell and face."""
        value = float(value)
        return cls(np.full(mesh.n_cells, value), np.full(mesh.n_faces, value))

    @classmethod
    def random(
        cls,
        mesh: Mesh,
        rng: np.random.Generator,
        *,
        constrained: bool = False,
    ) -> DiscreteField:
        """Draw cell and face values uniformly from [-1, 1].

        Args:
            mesh: Mesh the field lives on
            rng: Random generator
            constrained: Zero the boundary faces (X_D,0)

        """
        field = cls(
            rng.uniform(-1.0, 1.0, mesh.n_cells), rng.uniform(-1.0, 1.0, mesh.n_faces)
        )
        return field.constrained(mesh) if constrained else field

    def constrained(self, mesh: Mesh) -> DiscreteField:
        """Return a copy with u_sigma = 0 on every boundary face."""
        faces = self.face_values.copy()
        faces[mesh.boundary_mask] = 0.0
        return DiscreteField(self.cell_values.copy(), faces, boundary_constrained=True)

    def copy(self) -> DiscreteField:
        """Return a deep copy."""
        return DiscreteField(
            self.cell_values.copy(), self.face_values.copy(), self.boundary_constrained
        )

    def check(self, mesh: Mesh) -> None:
        """Check sizes against a mesh and the X_D,0 constraint.

        Raises:
            ValueError: If the field does not fit the mesh

        """
        shapes = (self.cell_values.shape, self.face_values.shape)
        if shapes != ((mesh.n_cells,), (mesh.n_faces,)):
            msg = (
                f"Field of shape ({shapes[0]}, {shapes[1]}) does not match mesh "
                f"with {mesh.n_cells} cells and {mesh.n_faces} faces"
            )
            raise ValueError(msg)
        boundary = self.face_values[mesh.boundary_mask]
        if self.boundary_constrained and np.any(boundary != 0.0):
            msg = "Boundary-constrained field has non-zero boundary face values"
            raise ValueError(msg)

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"DiscreteField(cells={self.cell_values.size}, "
            f"faces={self.face_values.size}, "
            f"constrained={self.boundary_constrained})"
        )


def project(mesh: Mesh, function: Callable[[np.ndarray], np.ndarray]) -> DiscreteField:
    """Interpolate a function at cell and face points (P_D).

    Args:
        mesh: Mesh to project on
        function: Vectorized map from points (n, d) to values (n,)

    Returns:
        Field with u_K = phi(x_K) and u_sigma = phi(x_sigma)

    """
    cells = np.asarray(function(mesh.cell_centers), dtype=float)
    faces = np.asarray(function(mesh.face_centers), dtype=float)
    cells = np.broadcast_to(cells, (mesh.n_cells,))
    faces = np.broadcast_to(faces, (mesh.n_faces,))
    return DiscreteField(cells.copy(), faces.copy())
