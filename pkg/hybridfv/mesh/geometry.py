"""Polyhedral mesh representation.

A mesh is the triplet (cells, faces, cell points) of a finite volume
discretization. Geometry is stored in flat numpy arrays; ``Cell`` and
``Face`` are lightweight per-entity views built on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

# Marker in ``face_cells[:, 1]`` for boundary faces
NO_CELL = -1


@dataclass(frozen=True, eq=False)
class Cell:
    """A control volume K.

    Attributes:
        index: Position of the cell in the mesh
        center: Cell point x_K
        measure: Volume m(K)
        diameter: Diameter h_K
        faces: Face indices E_K in mesh order

    """

    index: int
    center: np.ndarray
    measure: float
    diameter: float
    faces: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Face:
    """A mesh face sigma seen from its one or two incident cells.

    Attributes:
        index: Position of the face in the mesh
        center: Barycenter x_sigma
        measure: (d-1)-dimensional measure m(sigma)
        cells: Incident cells M_sigma (one for boundary faces)
        normals: Outward unit normal n_{K,sigma} for each incident cell
        distances: Orthogonal distance d_{K,sigma} for each incident cell
        cone_measures: m(D_{K,sigma}) = m(sigma) d_{K,sigma} / d for each incident cell

    """

    index: int
    center: np.ndarray
    measure: float
    cells: tuple[int, ...]
    normals: tuple[np.ndarray, ...]
    distances: tuple[float, ...]
    cone_measures: tuple[float, ...]

    @property
    def is_boundary(self) -> bool:
        """Whether the face lies on the domain boundary."""
        return len(self.cells) == 1


@dataclass(frozen=True, eq=False)
class BoxLattice:
    """Integer description of an axis-aligned box tiling.

    Cell K spans ``origin + lo[K] * spacing`` to ``origin + hi[K] * spacing``.
    Integer corners make face matching exact under refinement.

    Attributes:
        origin: Lower domain corner
        spacing: Physical length of one lattice unit per axis
        lo: Lower integer corners, shape (n_cells, d)
        hi: Upper integer corners, shape (n_cells, d)
        extent: Number of lattice units spanned by the domain per axis

    """

    origin: np.ndarray
    spacing: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    extent: np.ndarray

    def refined(self) -> BoxLattice:
        """Return the same tiling on a lattice twice as fine."""
        return BoxLattice(
            origin=self.origin,
            spacing=self.spacing / 2.0,
            lo=self.lo * 2,
            hi=self.hi * 2,
            extent=self.extent * 2,
        )

    def physical_boxes(self) -> np.ndarray:
        """Return physical cell corners, shape (n_cells, 2, d)."""
        lower = self.origin + self.lo * self.spacing
        upper = self.origin + self.hi * self.spacing
        return np.stack([lower, upper], axis=1)


@dataclass(frozen=True, eq=False)
class Mesh:
    """General polyhedral mesh with one or two cells per face.

    Each face stores a single unit normal, oriented outward from
    ``face_cells[f, 0]``; the second cell (if any) sees its negation.

    Attributes:
        dim: Spatial dimension d
        cell_centers: x_K, shape (n_cells, d)
        cell_volumes: m(K), shape (n_cells,)
        cell_diameters: h_K, shape (n_cells,)
        face_centers: x_sigma, shape (n_faces, d)
        face_areas: m(sigma), shape (n_faces,)
        face_cells: Incident cells, shape (n_faces, 2); NO_CELL in column 1
            for boundary faces
        face_normals: Unit normal outward from face_cells[:, 0], shape (n_faces, d)
        face_distances: d_{K,sigma} for both sides, shape (n_faces, 2); 0 where no cell
        lattice: Integer box description for generated meshes, else None
        metadata: Provenance (generator, resolution, refinement seeds)

    """

    dim: int
    cell_centers: np.ndarray
    cell_volumes: np.ndarray
    cell_diameters: np.ndarray
    face_centers: np.ndarray
    face_areas: np.ndarray
    face_cells: np.ndarray
    face_normals: np.ndarray
    face_distances: np.ndarray
    lattice: BoxLattice | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_cells(self) -> int:
        """Number of control volumes card(M)."""
        return int(self.cell_volumes.shape[0])

    @property
    def n_faces(self) -> int:
        """Number of faces card(E)."""
        return int(self.face_areas.shape[0])

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Boolean mask of boundary faces (E_ext)."""
        return self.face_cells[:, 1] == NO_CELL

    @property
    def boundary_faces(self) -> np.ndarray:
        """Indices of boundary faces."""
        return np.flatnonzero(self.boundary_mask)

    @property
    def interior_faces(self) -> np.ndarray:
        """Indices of interior faces."""
        return np.flatnonzero(~self.boundary_mask)

    # Cell-face incidences ("half-faces"), sorted by cell then face.

    @cached_property
    def _half_faces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        interior = np.flatnonzero(~self.boundary_mask)
        faces = np.concatenate([np.arange(self.n_faces), interior])
        sides = np.concatenate(
            [np.zeros(self.n_faces, dtype=int), np.ones(interior.size, dtype=int)]
        )
        cells = self.face_cells[faces, sides]
        order = np.lexsort((faces, cells))
        return cells[order], faces[order], sides[order]

    @property
    def hf_cell(self) -> np.ndarray:
        """Cell K of each half-face (K, sigma)."""
        return self._half_faces[0]

    @property
    def hf_face(self) -> np.ndarray:
        """Face sigma of each half-face (K, sigma)."""
        return self._half_faces[1]

    @property
    def hf_side(self) -> np.ndarray:
        """Column of ``face_cells`` holding K for each half-face."""
        return self._half_faces[2]

    @property
    def n_half_faces(self) -> int:
        """Total number of cell-face incidences."""
        return int(self.hf_cell.shape[0])

    @cached_property
    def hf_offsets(self) -> np.ndarray:
        """CSR offsets: half-faces of cell K are ``hf_offsets[K]:hf_offsets[K+1]``."""
        counts = np.bincount(self.hf_cell, minlength=self.n_cells)
        return np.concatenate([[0], np.cumsum(counts)])

    @cached_property
    def hf_normal(self) -> np.ndarray:
        """Outward unit normal n_{K,sigma} per half-face."""
        sign = np.where(self.hf_side == 0, 1.0, -1.0)
        return self.face_normals[self.hf_face] * sign[:, None]

    @cached_property
    def hf_distance(self) -> np.ndarray:
        """Orthogonal distance d_{K,sigma} per half-face."""
        return self.face_distances[self.hf_face, self.hf_side]

    @cached_property
    def hf_cone_volume(self) -> np.ndarray:
        """Cone measure m(D_{K,sigma}) per half-face."""
        return self.face_areas[self.hf_face] * self.hf_distance / self.dim

    @cached_property
    def hf_cone_centroid(self) -> np.ndarray:
        """Centroid of each cone D_{K,sigma}: d/(d+1) of the way from x_K to x_sigma."""
        apex = self.cell_centers[self.hf_cell]
        base = self.face_centers[self.hf_face]
        return apex + self.dim / (self.dim + 1.0) * (base - apex)

    def cell_faces(self, cell: int) -> np.ndarray:
        """Return the ordered face list E_K of a cell."""
        start, stop = self.hf_offsets[cell], self.hf_offsets[cell + 1]
        return self.hf_face[start:stop]

    def half_face(self, cell: int, face: int) -> int:
        """Return the half-face index of the incidence (K, sigma).

        Raises:
            ValueError: If ``face`` is not a face of ``cell``

        """
        start = int(self.hf_offsets[cell])
        matches = np.flatnonzero(self.cell_faces(cell) == face)
        if matches.size == 0:
            msg = f"Face {face} is not a face of cell {cell}"
            raise ValueError(msg)
        return start + int(matches[0])

    def cell(self, index: int) -> Cell:
        """Build the Cell view of control volume ``index``."""
        return Cell(
            index=index,
            center=self.cell_centers[index].copy(),
            measure=float(self.cell_volumes[index]),
            diameter=float(self.cell_diameters[index]),
            faces=tuple(int(f) for f in self.cell_faces(index)),
        )

    def face(self, index: int) -> Face:
        """Build the Face view of face ``index``."""
        n_sides = 1 if self.boundary_mask[index] else 2
        normal = self.face_normals[index]
        distances = tuple(float(self.face_distances[index, s]) for s in range(n_sides))
        area = float(self.face_areas[index])
        return Face(
            index=index,
            center=self.face_centers[index].copy(),
            measure=area,
            cells=tuple(int(self.face_cells[index, s]) for s in range(n_sides)),
            normals=tuple(normal.copy() if s == 0 else -normal for s in range(n_sides)),
            distances=distances,
            cone_measures=tuple(area * dist / self.dim for dist in distances),
        )

    def cell_boxes(self) -> np.ndarray | None:
        """Return physical corners of box cells, or None for general polyhedra."""
        if self.lattice is None:
            return None
        return self.lattice.physical_boxes()

    @property
    def total_volume(self) -> float:
        """Sum of all cell measures."""
        return float(self.cell_volumes.sum())

    def __repr__(self) -> str:
        """Return a short description of the mesh."""
        return (
            f"Mesh(dim={self.dim}, cells={self.n_cells}, faces={self.n_faces}, "
            f"boundary={int(self.boundary_mask.sum())})"
        )
