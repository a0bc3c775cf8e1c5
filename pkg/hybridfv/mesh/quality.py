"""Mesh regularity measures and invariant checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hybridfv.mesh.geometry import Mesh

# Relative tolerance of the geometric identities
GEOMETRY_TOL = 1e-12


@dataclass(frozen=True)
class MeshQuality:
    """Mesh size and regularity.

    Attributes:
        h: Mesh size h_D, the largest cell diameter
        theta: Regularity ratio theta_D (>= 1)

    """

    h: float
    theta: float

    def to_dict(self) -> dict[str, float]:
        """Convert to a dictionary for serialization."""
        return {"h": self.h, "theta": self.theta}


@dataclass(eq=False)
class MeshReport:
    """Outcome of ``validate``.

    Attributes:
        quality: h_D and theta_D
        identity_residual: Per-cell Frobenius residual of
            sum m(sigma) n (x_sigma - x_K)^T - m(K) Id, divided by m(K)
        closure_residual: Per-cell |sum m(sigma) n| divided by sum m(sigma)
        cone_sum_residual: Relative defect of sum m(sigma) d_{K,sigma} = d sum m(K)
        violations: Human-readable list of violated invariants

    """

    quality: MeshQuality
    identity_residual: np.ndarray
    closure_residual: np.ndarray
    cone_sum_residual: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Whether every invariant holds."""
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        """Convert the report to a dictionary for serialization."""
        return {
            "h": self.quality.h,
            "theta": self.quality.theta,
            "max_identity_residual": float(self.identity_residual.max(initial=0.0)),
            "max_closure_residual": float(self.closure_residual.max(initial=0.0)),
            "cone_sum_residual": self.cone_sum_residual,
            "violations": list(self.violations),
        }


def mesh_quality(mesh: Mesh) -> MeshQuality:
    """Compute h_D and theta_D of a mesh."""
    h = float(mesh.cell_diameters.max())
    distances = mesh.hf_distance
    with np.errstate(divide="ignore"):
        shape_ratio = np.max(mesh.cell_diameters[mesh.hf_cell] / distances)
        interior = mesh.interior_faces
        if interior.size:
            d_k = mesh.face_distances[interior, 0]
            d_l = mesh.face_distances[interior, 1]
            neighbour_ratio = float(np.max(np.maximum(d_k / d_l, d_l / d_k)))
        else:
            neighbour_ratio = 1.0
    return MeshQuality(h=h, theta=float(max(shape_ratio, neighbour_ratio, 1.0)))


def validate(mesh: Mesh, domain_measure: float | None = None) -> MeshReport:
    """Check the invariants of a discretization.

    Args:
        mesh: Mesh to check
        domain_measure: Measure of the domain, when known, to check that
            the cells cover it

    Returns:
        MeshReport listing residuals, quality and violations

    """
    violations = incidence_violations(mesh)
    if violations:
        empty = np.zeros(0)
        nan_quality = MeshQuality(h=float("nan"), theta=float("nan"))
        return MeshReport(nan_quality, empty, empty, float("nan"), violations)

    dim = mesh.dim
    hf_cell = mesh.hf_cell
    areas = mesh.face_areas[mesh.hf_face]
    normals = mesh.hf_normal
    offsets = mesh.face_centers[mesh.hf_face] - mesh.cell_centers[hf_cell]

    if np.any(mesh.cell_volumes <= 0):
        violations.append("measure: non-positive cell measure")
    if np.any(mesh.cell_diameters <= 0):
        violations.append("measure: non-positive cell diameter")
    if np.any(mesh.face_areas <= 0):
        violations.append("measure: non-positive face measure")

    if np.any(mesh.hf_distance <= 0):
        violations.append("distance: d_K,sigma must be positive")
    if np.any(np.abs(np.linalg.norm(mesh.face_normals, axis=1) - 1.0) > GEOMETRY_TOL):
        violations.append("normal: face normal is not a unit vector")
    signed = np.einsum("ij,ij->i", offsets, normals)
    scale = mesh.cell_diameters[hf_cell]
    if np.any(np.abs(signed - mesh.hf_distance) > GEOMETRY_TOL * scale):
        violations.append(
            "normal: orientation or distance inconsistent with "
            "(x_sigma - x_K) . n_K,sigma"
        )

    weighted = areas[:, None] * normals
    closure = np.zeros((mesh.n_cells, dim))
    np.add.at(closure, hf_cell, weighted)
    perimeter = np.bincount(hf_cell, weights=areas, minlength=mesh.n_cells)
    perimeter = np.where(perimeter > 0, perimeter, 1.0)
    closure_residual = np.linalg.norm(closure, axis=1) / perimeter
    if np.any(closure_residual > GEOMETRY_TOL):
        violations.append("closure: sum of m(sigma) n_K,sigma is not zero")

    moments = np.zeros((mesh.n_cells, dim, dim))
    np.add.at(moments, hf_cell, weighted[:, :, None] * offsets[:, None, :])
    moments -= mesh.cell_volumes[:, None, None] * np.eye(dim)
    volumes = np.where(mesh.cell_volumes > 0, mesh.cell_volumes, 1.0)
    identity_residual = np.linalg.norm(moments, axis=(1, 2)) / volumes
    if np.any(identity_residual > GEOMETRY_TOL):
        violations.append(
            "identity: sum m(sigma) n (x_sigma - x_K)^T differs from m(K) Id"
        )

    total = mesh.total_volume
    cone_sum = float(np.sum(areas * mesh.hf_distance))
    if total > 0:
        cone_sum_residual = abs(cone_sum - dim * total) / (dim * total)
    else:
        cone_sum_residual = np.inf
    if cone_sum_residual > GEOMETRY_TOL:
        violations.append("cones: sum m(sigma) d_K,sigma differs from d sum m(K)")

    if (
        domain_measure is not None
        and abs(total - domain_measure) > GEOMETRY_TOL * domain_measure
    ):
        violations.append(
            f"cover: cell measures sum to {total!r}, "
            f"domain measure is {domain_measure!r}"
        )

    return MeshReport(
        quality=mesh_quality(mesh),
        identity_residual=identity_residual,
        closure_residual=closure_residual,
        cone_sum_residual=float(cone_sum_residual),
        violations=violations,
    )


def incidence_violations(mesh: Mesh) -> list[str]:
    """Check face-to-cell incidence.

    Every face needs one or two valid, distinct cells and every cell needs
    faces.
    """
    violations = []
    first, second = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    out_of_range = (
        np.any(first < 0)
        or np.any(first >= mesh.n_cells)
        or np.any(second >= mesh.n_cells)
        or np.any(second < -1)
    )
    if out_of_range:
        violations.append("incidence: face references a missing cell")
        return violations
    if np.any(first == second):
        violations.append("incidence: face lists the same cell twice")
    touched = np.zeros(mesh.n_cells, dtype=bool)
    touched[first] = True
    touched[second[second >= 0]] = True
    if not touched.all():
        violations.append("incidence: cell without faces")
    return violations
