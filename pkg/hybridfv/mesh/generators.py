"""Axis-aligned box mesh generation and random nonmatching refinement."""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from hybridfv.exceptions import MeshError
from hybridfv.mesh.geometry import NO_CELL, BoxLattice, Mesh

logger = logging.getLogger(__name__)


def build_box_mesh(
    domain: Sequence[Sequence[float]],
    resolution: Sequence[int],
) -> Mesh:
    """Build a conforming Cartesian mesh of an axis-aligned box.

    Args:
        domain: Per-axis bounds, e.g. ``[(0, 2), (0, 1), (0, 1)]``
        resolution: Number of cells per axis

    Returns:
        Conforming hexahedral (d=3) or quadrilateral (d=2) mesh with cell
        centroids as cell points and face centroids as face points

    Raises:
        MeshError: If the box is degenerate or the resolution is invalid

    """
    bounds = np.asarray(domain, dtype=float)
    counts = np.asarray(resolution, dtype=int)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or bounds.shape[0] not in (2, 3):
        msg = f"Domain must be 2 or 3 (lo, hi) pairs, got shape {bounds.shape}"
        raise MeshError(msg)
    if counts.shape != (bounds.shape[0],):
        msg = f"Resolution needs one entry per axis, got {list(resolution)}"
        raise MeshError(msg)
    if np.any(counts < 1):
        msg = f"Resolution must be at least 1 per axis, got {list(resolution)}"
        raise MeshError(msg)
    extent = bounds[:, 1] - bounds[:, 0]
    if np.any(extent <= 0):
        msg = f"Degenerate box: zero or negative extent {extent.tolist()}"
        raise MeshError(msg)

    dim = bounds.shape[0]
    # Axis 0 varies fastest in the cell numbering
    indices = np.meshgrid(*[np.arange(n) for n in counts[::-1]], indexing="ij")
    grid = np.stack(indices, axis=-1)
    lo = grid.reshape(-1, dim)[:, ::-1].copy()
    lattice = BoxLattice(
        origin=bounds[:, 0].copy(),
        spacing=extent / counts,
        lo=lo,
        hi=lo + 1,
        extent=counts.copy(),
    )
    metadata = {
        "generator": "box",
        "domain": bounds.tolist(),
        "resolution": counts.tolist(),
        "refinements": [],
    }
    mesh = mesh_from_lattice(lattice, metadata)
    logger.info("Built box mesh: %d cells, %d faces", mesh.n_cells, mesh.n_faces)
    return mesh


def refine_random(mesh: Mesh, probability: float, seed: int) -> Mesh:
    """Split randomly selected cells of a box mesh into 2^d children.

    A coarse cell next to a refined neighbour keeps the 2^(d-1) sub-faces
    as distinct faces, which makes the mesh nonmatching.

    Args:
        mesh: Mesh built by ``build_box_mesh`` (possibly already refined)
        probability: Selection probability per cell, in [0, 1]
        seed: Seed of the PCG64 generator driving the selection

    Returns:
        Refined mesh; the input mesh itself when no cell is selected

    Raises:
        ValueError: If probability is outside [0, 1]
        MeshError: If the mesh carries no box lattice

    """
    if not 0.0 <= probability <= 1.0:
        msg = f"Refinement probability must be in [0, 1], got {probability}"
        raise ValueError(msg)
    if mesh.lattice is None:
        msg = "Random refinement requires an axis-aligned box mesh"
        raise MeshError(msg)

    rng = np.random.Generator(np.random.PCG64(seed))
    selected = rng.random(mesh.n_cells) < probability
    if not selected.any():
        return mesh

    fine = mesh.lattice.refined()
    dim = mesh.dim
    offsets = np.array(list(np.ndindex(*(2,) * dim)))
    lo_parts: list[np.ndarray] = []
    hi_parts: list[np.ndarray] = []
    for cell in range(mesh.n_cells):
        lo, hi = fine.lo[cell], fine.hi[cell]
        if selected[cell]:
            half = (hi - lo) // 2
            child_lo = lo + offsets * half
            lo_parts.append(child_lo)
            hi_parts.append(child_lo + half)
        else:
            lo_parts.append(lo[None, :])
            hi_parts.append(hi[None, :])

    lattice = BoxLattice(
        origin=fine.origin,
        spacing=fine.spacing,
        lo=np.concatenate(lo_parts),
        hi=np.concatenate(hi_parts),
        extent=fine.extent,
    )
    metadata = dict(mesh.metadata)
    metadata["refinements"] = [
        *mesh.metadata.get("refinements", []),
        {
            "probability": probability,
            "seed": seed,
            "refined_cells": int(selected.sum()),
        },
    ]
    refined = mesh_from_lattice(lattice, metadata)
    logger.info(
        "Refined %d of %d cells (seed=%d): %d cells, %d faces",
        int(selected.sum()),
        mesh.n_cells,
        seed,
        refined.n_cells,
        refined.n_faces,
    )
    return refined


def mesh_from_lattice(lattice: BoxLattice, metadata: dict | None = None) -> Mesh:
    """Compute faces and geometry of a box tiling.

    Faces are the positive-measure intersections of opposite sides of
    neighbouring boxes; sides on the domain boundary become boundary faces.

    Args:
        lattice: Integer box tiling of the domain
        metadata: Provenance record stored on the mesh

    Returns:
        Mesh with cell centroids and face barycenters as points

    Raises:
        MeshError: If the boxes do not tile the domain face to face

    """
    lo, hi = lattice.lo, lattice.hi
    n_cells, dim = lo.shape
    if np.any(hi <= lo):
        msg = "Lattice contains a box with non-positive extent"
        raise MeshError(msg)

    spacing = lattice.spacing
    lower = lattice.origin + lo * spacing
    upper = lattice.origin + hi * spacing
    centers = 0.5 * (lower + upper)
    sizes = upper - lower

    face_cells: list[tuple[int, int]] = []
    face_lo: list[np.ndarray] = []
    face_hi: list[np.ndarray] = []
    face_axis: list[int] = []
    face_plane: list[int] = []
    covered = np.zeros((n_cells, dim, 2), dtype=np.int64)

    for axis in range(dim):
        others = [a for a in range(dim) if a != axis]
        # Cells whose upper side (minus) or lower side (plus) lies on each plane
        minus_by_plane: dict[int, list[int]] = defaultdict(list)
        plus_by_plane: dict[int, list[int]] = defaultdict(list)
        for cell in range(n_cells):
            minus_by_plane[int(hi[cell, axis])].append(cell)
            plus_by_plane[int(lo[cell, axis])].append(cell)

        for plane in sorted(set(minus_by_plane) | set(plus_by_plane)):
            minus = np.array(minus_by_plane.get(plane, []), dtype=int)
            plus = np.array(plus_by_plane.get(plane, []), dtype=int)
            if plane == 0 or plane == lattice.extent[axis]:
                for cell in minus if plane else plus:
                    face_cells.append((int(cell), NO_CELL))
                    face_lo.append(lo[cell, others])
                    face_hi.append(hi[cell, others])
                    face_axis.append(axis)
                    face_plane.append(plane)
                continue
            if minus.size == 0 or plus.size == 0:
                msg = f"Unmatched box side on plane {plane} of axis {axis}"
                raise MeshError(msg)
            overlap_lo = np.maximum(
                lo[minus][:, None, others], lo[plus][None, :, others]
            )
            overlap_hi = np.minimum(
                hi[minus][:, None, others], hi[plus][None, :, others]
            )
            touching = np.all(overlap_hi > overlap_lo, axis=-1)
            for i, j in zip(*np.nonzero(touching), strict=True):
                face_cells.append((int(minus[i]), int(plus[j])))
                face_lo.append(overlap_lo[i, j])
                face_hi.append(overlap_hi[i, j])
                face_axis.append(axis)
                face_plane.append(plane)
                area_units = int(np.prod(overlap_hi[i, j] - overlap_lo[i, j]))
                covered[minus[i], axis, 1] += area_units
                covered[plus[j], axis, 0] += area_units

    n_faces = len(face_cells)
    cells_arr = np.array(face_cells, dtype=int).reshape(n_faces, 2)
    axes = np.array(face_axis, dtype=int)
    planes = np.array(face_plane, dtype=int)

    # Every interior side must be covered exactly by its sub-faces
    side_units = np.stack(
        [np.prod(np.delete(hi - lo, a, axis=1), axis=1) for a in range(dim)], axis=1
    )
    for axis in range(dim):
        for side, bound in ((0, lo), (1, hi)):
            on_boundary = bound[:, axis] == (0 if side == 0 else lattice.extent[axis])
            gaps = (covered[:, axis, side] != side_units[:, axis]) & ~on_boundary
            if gaps.any():
                cell = int(np.flatnonzero(gaps)[0])
                msg = f"Cell {cell} has a side not tiled by faces"
                raise MeshError(msg)

    face_centers = np.empty((n_faces, dim))
    face_areas = np.empty(n_faces)
    face_normals = np.zeros((n_faces, dim))
    face_distances = np.zeros((n_faces, 2))
    for f in range(n_faces):
        axis = axes[f]
        others = [a for a in range(dim) if a != axis]
        center = np.empty(dim)
        center[axis] = lattice.origin[axis] + planes[f] * spacing[axis]
        middle = 0.5 * (face_lo[f] + face_hi[f])
        center[others] = lattice.origin[others] + middle * spacing[others]
        face_centers[f] = center
        face_areas[f] = float(np.prod((face_hi[f] - face_lo[f]) * spacing[others]))
        first, second = cells_arr[f]
        if second == NO_CELL and planes[f] == 0:
            # Lower boundary: the outward normal of the only cell points to -axis
            face_normals[f, axis] = -1.0
            face_distances[f, 0] = centers[first, axis] - center[axis]
        else:
            face_normals[f, axis] = 1.0
            face_distances[f, 0] = center[axis] - centers[first, axis]
            if second != NO_CELL:
                face_distances[f, 1] = centers[second, axis] - center[axis]

    return Mesh(
        dim=dim,
        cell_centers=centers,
        cell_volumes=np.prod(sizes, axis=1),
        cell_diameters=np.linalg.norm(sizes, axis=1),
        face_centers=face_centers,
        face_areas=face_areas,
        face_cells=cells_arr,
        face_normals=face_normals,
        face_distances=face_distances,
        lattice=lattice,
        metadata=dict(metadata or {}),
    )


def generate_mesh(
    domain: Sequence[Sequence[float]],
    resolution: Sequence[int],
    probability: float = 0.0,
    seed: int = 0,
    passes: int = 1,
) -> Mesh:
    """Build a box mesh and refine it ``passes`` times with seeds seed, seed+1, ...

    Raises:
        ValueError: If passes is negative

    """
    if passes < 0:
        msg = f"Number of refinement passes must be non-negative, got {passes}"
        raise ValueError(msg)
    mesh = build_box_mesh(domain, resolution)
    if probability > 0:
        for offset in range(passes):
            mesh = refine_random(mesh, probability, seed + offset)
    return mesh
