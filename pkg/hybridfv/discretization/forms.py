"""Bilinear forms and discrete norms on X_D."""

from __future__ import annotations

import numpy as np

from hybridfv.discretization.fields import DiscreteField
from hybridfv.discretization.gradient import gradient_field
from hybridfv.discretization.operator import (
    CellOperator,
    TensorInput,
    cone_tensors,
    convective_fluxes,
    diffusive_fluxes,
)
from hybridfv.mesh.geometry import Mesh


def _test_differences(mesh: Mesh, field: DiscreteField) -> np.ndarray:
    """v_K - v_sigma per half-face."""
    return field.cell_values[mesh.hf_cell] - field.face_values[mesh.hf_face]


def bilinear_F(  # noqa: N802
    operator: CellOperator, v: DiscreteField, u: DiscreteField
) -> float:
    """Diffusive form <v, u>_F = sum_K sum_sigma (v_K - v_sigma) F_K,sigma(u)."""
    return float(_test_differences(operator.mesh, v) @ diffusive_fluxes(operator, u))


def bilinear_F_from_gradients(  # noqa: N802
    mesh: Mesh,
    v: DiscreteField,
    u: DiscreteField,
    diffusion: TensorInput,
    alpha: float | np.ndarray | None = None,
) -> float:
    """Evaluate <v, u>_F cone by cone as int grad_D v . Lambda grad_D u.

    Uses the same one-point rule for Lambda as the assembly, so it agrees
    with ``bilinear_F`` up to rounding.
    """
    grad_v = gradient_field(mesh, v, alpha).cone
    grad_u = gradient_field(mesh, u, alpha).cone
    tensors = cone_tensors(mesh, diffusion)
    energy = np.einsum("ni,nij,nj->n", grad_v, tensors, grad_u)
    return float(energy @ mesh.hf_cone_volume)


def bilinear_T(  # noqa: N802
    operator: CellOperator, v: DiscreteField, u: DiscreteField
) -> float:
    """Convective form <v, u>_T.

    Sums (v_K - v_sigma) V_K,sigma u_bar_K,sigma over all half-faces.
    """
    return float(_test_differences(operator.mesh, v) @ convective_fluxes(operator, u))


def seminorm_X(mesh: Mesh, field: DiscreteField) -> float:  # noqa: N802
    """|v|_X = sqrt(sum_K sum_sigma m(sigma)/d_K,sigma (v_sigma - v_K)^2)."""
    jumps = _test_differences(mesh, field)
    weights = mesh.face_areas[mesh.hf_face] / mesh.hf_distance
    return float(np.sqrt(np.sum(weights * jumps**2)))


def l2_norm(mesh: Mesh, cell_values: np.ndarray) -> float:
    """L2 norm of a piecewise constant function, sqrt(sum m(K) v_K^2)."""
    values = np.asarray(cell_values, dtype=float)
    return float(np.sqrt(np.sum(mesh.cell_volumes * values**2)))


def norm_1pM(  # noqa: N802
    mesh: Mesh, cell_values: np.ndarray, p: float = 2.0
) -> float:
    """Discrete W^{1,p} norm of a piecewise constant function.

    ||v||^p = sum_K sum_sigma m(sigma) d_K,sigma (D_sigma v / d_sigma)^p with
    D_sigma v = |v_K - v_L|, d_sigma = d_K,sigma + d_L,sigma on interior
    faces and D_sigma v = |v_K|, d_sigma = d_K,sigma on boundary faces.

    Args:
        mesh: Mesh
        cell_values: v_K per cell
        p: Exponent, at least 1

    Returns:
        ||v||_{1,p,M}

    Raises:
        ValueError: If p < 1

    """
    if p < 1:
        msg = f"Exponent p must be >= 1, got {p}"
        raise ValueError(msg)
    values = np.asarray(cell_values, dtype=float)
    first, second = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    interior = ~mesh.boundary_mask
    jumps = np.abs(values[first])
    jumps[interior] = np.abs(values[first[interior]] - values[second[interior]])
    spans = mesh.face_distances.sum(axis=1)
    slopes = jumps / spans
    weight = mesh.face_areas[mesh.hf_face] * mesh.hf_distance
    return float(np.sum(weight * slopes[mesh.hf_face] ** p) ** (1.0 / p))


def gradient_norm(
    mesh: Mesh, field: DiscreteField, alpha: float | np.ndarray | None = None
) -> float:
    """||grad_D u||_L2 = sqrt(sum over cones of m(D_K,sigma) |grad_K,sigma u|^2)."""
    cone = gradient_field(mesh, field, alpha).cone
    squares = np.einsum("ij,ij->i", cone, cone)
    return float(np.sqrt(np.sum(mesh.hf_cone_volume * squares)))


def norm_equivalence_interval(
    mesh: Mesh,
    samples: int,
    rng: np.random.Generator,
    alpha: float | np.ndarray | None = None,
) -> tuple[float, float]:
    """Sample the ratio ||grad_D v||_L2 / |v|_X over random v in X_D,0.

    Returns:
        (min, max) of the ratio over ``samples`` draws

    """
    ratios = []
    for _ in range(samples):
        field = DiscreteField.random(mesh, rng, constrained=True)
        ratios.append(gradient_norm(mesh, field, alpha) / seminorm_X(mesh, field))
    return float(min(ratios)), float(max(ratios))
