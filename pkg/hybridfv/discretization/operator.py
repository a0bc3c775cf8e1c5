"""Local flux matrices and upwind convective fluxes.

For every cell K the symmetric matrix A_K realizes the cone-wise energy
``int_K grad_D v . Lambda grad_D u``; the diffusive flux through sigma is

    F_K,sigma(u) = sum_sigma' A_K^{sigma sigma'} (u_K - u_sigma')

and the convective flux is partially upwinded between u_K and u_sigma:

    V+_K,sigma u_K + V-_K,sigma u_sigma

Local matrices are stored as flat (cell, row, column, value) "pairs" whose
row and column are half-face indices of the owning mesh.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.discretization.gradient import resolve_alpha
from hybridfv.mesh.geometry import Mesh

logger = logging.getLogger(__name__)

# Relative tolerance of the symmetry check on Lambda
SYMMETRY_TOL = 1e-12

TensorInput = np.ndarray | Callable[[np.ndarray], np.ndarray]
VectorInput = np.ndarray | Callable[[np.ndarray], np.ndarray] | None


@dataclass(frozen=True, eq=False)
class CellOperator:
    """Assembled diffusion and convection data of a mesh.

    Attributes:
        mesh: Mesh the operator was assembled on
        alpha: Stabilization parameter alpha_K per cell
        pair_cell: Owning cell of each local matrix entry
        pair_row: Half-face index of sigma for each entry
        pair_col: Half-face index of sigma' for each entry
        pair_value: A_K^{sigma sigma'}
        velocity: V_K,sigma = int_sigma V . n_K,sigma per half-face

    """

    mesh: Mesh
    alpha: np.ndarray
    pair_cell: np.ndarray
    pair_row: np.ndarray
    pair_col: np.ndarray
    pair_value: np.ndarray
    velocity: np.ndarray

    @property
    def v_plus(self) -> np.ndarray:
        """Outflow part V+ = max(V, 0) per half-face."""
        return np.maximum(self.velocity, 0.0)

    @property
    def v_minus(self) -> np.ndarray:
        """Inflow part V- = min(V, 0) per half-face."""
        return np.minimum(self.velocity, 0.0)

    @cached_property
    def pair_offsets(self) -> np.ndarray:
        """CSR offsets of each cell's entries in the pair arrays."""
        counts = np.bincount(self.pair_cell, minlength=self.mesh.n_cells)
        return np.concatenate([[0], np.cumsum(counts)])

    @cached_property
    def row_sums(self) -> np.ndarray:
        """sum_sigma' A_K^{sigma sigma'} per half-face.

        This is the coefficient of u_K in F_K,sigma.
        """
        return np.bincount(
            self.pair_row, weights=self.pair_value, minlength=self.mesh.n_half_faces
        )

    def matrix(self, cell: int) -> np.ndarray:
        """Return A_K as a dense matrix ordered like ``mesh.cell_faces(cell)``."""
        start, stop = self.pair_offsets[cell], self.pair_offsets[cell + 1]
        size = int(self.mesh.hf_offsets[cell + 1] - self.mesh.hf_offsets[cell])
        return self.pair_value[start:stop].reshape(size, size).copy()

    def symmetry_defect(self) -> float:
        """Largest ||A_K - A_K^T|| / ||A_K|| over all cells."""
        worst = 0.0
        for cell in range(self.mesh.n_cells):
            local = self.matrix(cell)
            scale = np.linalg.norm(local)
            if scale > 0:
                worst = max(worst, float(np.linalg.norm(local - local.T) / scale))
        return worst

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"CellOperator(cells={self.mesh.n_cells}, "
            f"entries={self.pair_value.size})"
        )


def assemble_cell_operator(
    mesh: Mesh,
    diffusion: TensorInput,
    velocity: VectorInput = None,
    alpha: float | np.ndarray | None = None,
    *,
    strict: bool = True,
) -> CellOperator:
    """Assemble the local flux matrices from the cone gradients.

    A_K^{sigma sigma'} = sum_s y^{s sigma} . Lambda_K,s y^{s sigma'} where
    y^{s sigma'} is the coefficient of (u_sigma' - u_K) in grad_K,s u and
    Lambda_K,s = Lambda(cone centroid) m(D_K,s).

    Args:
        mesh: Mesh
        diffusion: Lambda as a (d, d) constant, an (n_cells, d, d) array of
            per-cell tensors, or a callable from points (n, d) to (n, d, d)
        velocity: V as a (d,) constant, an (n_cells, d) array of per-cell
            vectors, a callable from points (n, d) to (n, d), or None for V = 0
        alpha: Stabilization parameter (scalar or per cell), sqrt(d) if None
        strict: Reject tensors with an eigenvalue <= 0; when False, positive
            semidefinite tensors (Lambda = 0 included) are accepted

    Returns:
        CellOperator

    Raises:
        ValueError: If a tensor is not symmetric or not (semi)definite

    """
    alphas = resolve_alpha(mesh, alpha)
    tensors = cone_tensors(mesh, diffusion)
    _check_tensors(tensors, strict=strict)

    counts = np.diff(mesh.hf_offsets)
    pair_cell: list[np.ndarray] = []
    pair_row: list[np.ndarray] = []
    pair_col: list[np.ndarray] = []
    pair_value: list[np.ndarray] = []
    # Cells with the same number of faces are assembled together
    for size in np.unique(counts):
        cells = np.flatnonzero(counts == size)
        hf = mesh.hf_offsets[cells][:, None] + np.arange(size)
        faces = mesh.hf_face[hf]
        normals = mesh.hf_normal[hf]
        offsets = mesh.face_centers[faces] - mesh.cell_centers[cells][:, None, :]

        # grad_K u = mean @ (u_sigma - u_K)
        mean = np.swapaxes(mesh.face_areas[faces][:, :, None] * normals, 1, 2)
        mean /= mesh.cell_volumes[cells][:, None, None]
        jump = np.eye(size)[None] - np.einsum("msd,mdc->msc", offsets, mean)
        coef = alphas[cells][:, None] / mesh.hf_distance[hf]
        stabilization = (coef[:, :, None] * normals)[:, :, :, None]
        y = mean[:, None, :, :] + stabilization * jump[:, :, None, :]

        weights = tensors[hf] * mesh.hf_cone_volume[hf][:, :, None, None]
        local = np.einsum("msdi,msde,msej->mij", y, weights, y)

        pair_cell.append(np.broadcast_to(cells[:, None, None], local.shape).ravel())
        pair_row.append(np.broadcast_to(hf[:, :, None], local.shape).ravel())
        pair_col.append(np.broadcast_to(hf[:, None, :], local.shape).ravel())
        pair_value.append(local.ravel())

    rows = np.concatenate(pair_row)
    cols = np.concatenate(pair_col)
    order = np.lexsort((cols, rows))
    operator = CellOperator(
        mesh=mesh,
        alpha=alphas,
        pair_cell=np.concatenate(pair_cell)[order],
        pair_row=rows[order],
        pair_col=cols[order],
        pair_value=np.concatenate(pair_value)[order],
        velocity=_half_face_velocities(mesh, velocity),
    )
    logger.debug("Assembled %r", operator)
    return operator


def closed_form_matrix(mesh: Mesh, cell: int, diffusion: np.ndarray) -> np.ndarray:
    """Transcribe the explicit y^{sigma sigma'} vectors for alpha = sqrt(d).

    Loops over the faces of one cell; used to cross-check the vectorized
    assembly for a constant tensor.

    Args:
        mesh: Mesh
        cell: Cell index K
        diffusion: Constant (d, d) tensor Lambda

    Returns:
        Dense A_K ordered like ``mesh.cell_faces(cell)``

    """
    tensor = np.asarray(diffusion, dtype=float)
    start, stop = int(mesh.hf_offsets[cell]), int(mesh.hf_offsets[cell + 1])
    root_d = np.sqrt(mesh.dim)
    volume = mesh.cell_volumes[cell]
    x_k = mesh.cell_centers[cell]
    size = stop - start

    def y(s: int, c: int) -> np.ndarray:
        hs, hc = start + s, start + c
        n_s, n_c = mesh.hf_normal[hs], mesh.hf_normal[hc]
        x_s = mesh.face_centers[mesh.hf_face[hs]]
        d_s = mesh.hf_distance[hs]
        m_c = mesh.face_areas[mesh.hf_face[hc]]
        mean = m_c / volume * n_c
        if s == c:
            return mean + root_d / d_s * (1.0 - mean @ (x_s - x_k)) * n_c
        return mean - root_d / d_s * (mean @ (x_s - x_k)) * n_s

    local = np.zeros((size, size))
    for s in range(size):
        weight = tensor * mesh.hf_cone_volume[start + s]
        for i in range(size):
            for j in range(size):
                local[i, j] += y(s, i) @ weight @ y(s, j)
    return local


def diffusive_fluxes(operator: CellOperator, field: DiscreteField) -> np.ndarray:
    """Compute F_K,sigma(u) for every half-face."""
    mesh = operator.mesh
    differences = (
        field.cell_values[operator.pair_cell]
        - field.face_values[mesh.hf_face[operator.pair_col]]
    )
    return np.bincount(
        operator.pair_row,
        weights=operator.pair_value * differences,
        minlength=mesh.n_half_faces,
    )


def diffusive_flux(
    operator: CellOperator, field: DiscreteField, cell: int, face: int
) -> float:
    """Compute F_K,sigma(u) = sum_sigma' A_K^{sigma sigma'} (u_K - u_sigma')."""
    mesh = operator.mesh
    row = mesh.half_face(cell, face) - int(mesh.hf_offsets[cell])
    local = operator.matrix(cell)
    differences = field.cell_values[cell] - field.face_values[mesh.cell_faces(cell)]
    return float(local[row] @ differences)


def upwind_value(field: DiscreteField, cell: int, face: int, flux: float) -> float:
    """Return u_K when the flow leaves K through sigma (V >= 0), else u_sigma."""
    return float(field.cell_values[cell] if flux >= 0 else field.face_values[face])


def convective_flux(
    flux: np.ndarray | float,
    cell_value: np.ndarray | float,
    face_value: np.ndarray | float,
) -> np.ndarray | float:
    """Return V+ u_K + V- u_sigma (vectorized)."""
    return np.maximum(flux, 0.0) * cell_value + np.minimum(flux, 0.0) * face_value


def convective_fluxes(operator: CellOperator, field: DiscreteField) -> np.ndarray:
    """Compute V_K,sigma times the upwind value for every half-face."""
    mesh = operator.mesh
    return convective_flux(
        operator.velocity,
        field.cell_values[mesh.hf_cell],
        field.face_values[mesh.hf_face],
    )


def total_fluxes(operator: CellOperator, field: DiscreteField) -> np.ndarray:
    """Diffusive plus convective flux out of K through sigma, per half-face."""
    return diffusive_fluxes(operator, field) + convective_fluxes(operator, field)


def face_flux_balance(operator: CellOperator, field: DiscreteField) -> np.ndarray:
    """Sum of the total fluxes of all incident cells, per face.

    Zero on interior faces for a locally conservative field.
    """
    mesh = operator.mesh
    return np.bincount(
        mesh.hf_face, weights=total_fluxes(operator, field), minlength=mesh.n_faces
    )


def cone_tensors(mesh: Mesh, diffusion: TensorInput) -> np.ndarray:
    """Evaluate Lambda once per cone, shape (n_half_faces, d, d)."""
    dim = mesh.dim
    if callable(diffusion):
        tensors = np.asarray(diffusion(mesh.hf_cone_centroid), dtype=float)
        return np.broadcast_to(tensors, (mesh.n_half_faces, dim, dim))
    tensors = np.asarray(diffusion, dtype=float)
    if tensors.shape == (dim, dim):
        return np.broadcast_to(tensors, (mesh.n_half_faces, dim, dim))
    if tensors.shape == (mesh.n_cells, dim, dim):
        return tensors[mesh.hf_cell]
    msg = (
        f"Diffusion tensor must have shape ({dim}, {dim}) or "
        f"({mesh.n_cells}, {dim}, {dim}), got {tensors.shape}"
    )
    raise ValueError(msg)


def _check_tensors(tensors: np.ndarray, *, strict: bool) -> None:
    unique = np.unique(tensors.reshape(tensors.shape[0], -1), axis=0)
    dim = tensors.shape[-1]
    unique = unique.reshape(-1, dim, dim)
    scale = np.maximum(np.abs(unique).max(axis=(1, 2)), np.finfo(float).tiny)
    asymmetry = np.abs(unique - np.swapaxes(unique, 1, 2)).max(axis=(1, 2)) / scale
    if np.any(asymmetry > SYMMETRY_TOL):
        msg = (
            "Diffusion tensor is not symmetric "
            f"(relative defect {asymmetry.max():.3e})"
        )
        raise ValueError(msg)
    smallest = np.linalg.eigvalsh(0.5 * (unique + np.swapaxes(unique, 1, 2)))[:, 0]
    if strict and np.any(smallest <= 0):
        msg = (
            "Diffusion tensor must be positive definite, "
            f"smallest eigenvalue {smallest.min():.6g}"
        )
        raise ValueError(msg)
    if np.any(smallest < -SYMMETRY_TOL * scale):
        msg = f"Diffusion tensor has a negative eigenvalue {smallest.min():.6g}"
        raise ValueError(msg)


def _half_face_velocities(mesh: Mesh, velocity: VectorInput) -> np.ndarray:
    """V_K,sigma = V . n_K,sigma m(sigma) with V taken at the face barycenter."""
    dim = mesh.dim
    if velocity is None:
        return np.zeros(mesh.n_half_faces)
    if callable(velocity):
        vectors = np.asarray(velocity(mesh.face_centers), dtype=float)[mesh.hf_face]
    else:
        vectors = np.asarray(velocity, dtype=float)
        if vectors.shape == (dim,):
            vectors = np.broadcast_to(vectors, (mesh.n_half_faces, dim))
        elif vectors.shape == (mesh.n_cells, dim):
            vectors = vectors[mesh.hf_cell]
        else:
            msg = (
                f"Velocity must have shape ({dim},) or ({mesh.n_cells}, {dim}), "
                f"got {vectors.shape}"
            )
            raise ValueError(msg)
    normal = np.einsum("ij,ij->i", vectors, mesh.hf_normal)
    return normal * mesh.face_areas[mesh.hf_face]
