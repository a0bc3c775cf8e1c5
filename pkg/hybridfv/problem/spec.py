"""PDE data bundle.

A ``ProblemSpec`` describes

    d beta(u)/dt - div(Lambda grad u) + div(V u) + F(u) = q

on an axis-aligned box, with region-wise constant Lambda and V, Dirichlet
data on some sides of the box and zero flux on the others.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hybridfv.mesh.geometry import Mesh

PointFunction = Callable[[np.ndarray], np.ndarray]
SpaceTimeFunction = Callable[[np.ndarray, float], np.ndarray]
ScalarLaw = Callable[[np.ndarray], np.ndarray]

DIRICHLET = "dirichlet"
ZERO_FLUX = "zero_flux"

# Relative tolerance for locating points on the domain boundary
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class StorageLaw:
    """Monotone storage function beta and its inverse phi.

    Attributes:
        name: Catalog name
        beta: u -> beta(u)
        inverse: w -> phi(w) = beta^{-1}(w)
        derivative: u -> beta'(u), finite except where noted by the law
        inverse_derivative: w -> phi'(w), finite everywhere
        lower_slope: Declared beta_ (growth constant)
        sample_range: Value range on which the law is checked

    """

    name: str
    beta: ScalarLaw
    inverse: ScalarLaw
    derivative: ScalarLaw
    inverse_derivative: ScalarLaw
    lower_slope: float
    sample_range: tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class ReactionLaw:
    """Reaction term F with its declared constants.

    Attributes:
        name: Catalog name
        function: u -> F(u)
        derivative: u -> F'(u)
        monotone: Whether F is nondecreasing (no time-step restriction)
        decrease_rate: F_ in (F(u) - F(v))(u - v) >= -F_ (u - v)^2, None if monotone
        threshold: M beyond which u F(u) > 0 holds
        lipschitz: L_F beyond the threshold, None if not declared

    """

    name: str
    function: ScalarLaw
    derivative: ScalarLaw
    monotone: bool = True
    decrease_rate: float | None = None
    threshold: float = 0.0
    lipschitz: float | None = None


@dataclass(frozen=True, eq=False)
class Region:
    """Part of the domain with constant diffusion tensor and velocity.

    Attributes:
        name: Region label
        contains: Points (n, d) -> boolean mask
        diffusion: Symmetric tensor Lambda, shape (d, d)
        velocity: Velocity V, shape (d,)

    """

    name: str
    contains: Callable[[np.ndarray], np.ndarray]
    diffusion: np.ndarray
    velocity: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the diffusion tensor in increasing order."""
        return np.linalg.eigvalsh(0.5 * (self.diffusion + self.diffusion.T))


@dataclass(frozen=True, eq=False)
class BoundaryMode:
    """Boundary condition of every boundary face.

    Attributes:
        faces: Boundary face indices
        sides: Side label (``x1-``, ``x1+``, ...) per boundary face
        kinds: DIRICHLET or ZERO_FLUX per boundary face
        value: Dirichlet data g(x, t)

    """

    faces: np.ndarray
    sides: np.ndarray
    kinds: np.ndarray
    value: SpaceTimeFunction

    @property
    def dirichlet_faces(self) -> np.ndarray:
        """Faces carrying a Dirichlet condition."""
        return self.faces[self.kinds == DIRICHLET]

    @property
    def zero_flux_faces(self) -> np.ndarray:
        """Faces carrying a zero-flux condition."""
        return self.faces[self.kinds == ZERO_FLUX]

    def dirichlet_values(self, mesh: Mesh, t: float) -> np.ndarray:
        """Evaluate g at the Dirichlet face barycenters."""
        faces = self.dirichlet_faces
        if faces.size == 0:
            return np.zeros(0)
        return np.asarray(self.value(mesh.face_centers[faces], t), dtype=float)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Coefficients, data and hypothesis constants of one problem.

    Attributes:
        name: Problem name
        domain: Box bounds, shape (d, 2)
        storage: beta law (H1)
        reaction: F law (H5)
        regions: Ordered region partition; the first matching region wins
        source: q(x, t) (H6)
        initial: u_0(x) (H4)
        dirichlet: g(x, t) on Dirichlet sides
        exact: Exact solution u(x, t), when known
        zero_flux_sides: Box sides with a zero-flux condition
        final_time: Default final time T
        parameters: Problem parameters echoed into run records

    """

    name: str
    domain: np.ndarray
    storage: StorageLaw
    reaction: ReactionLaw
    regions: tuple[Region, ...]
    source: SpaceTimeFunction
    initial: PointFunction
    dirichlet: SpaceTimeFunction
    exact: SpaceTimeFunction | None = None
    zero_flux_sides: frozenset[str] = frozenset()
    final_time: float = 1.0
    parameters: dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        """Spatial dimension."""
        return int(self.domain.shape[0])

    @property
    def domain_measure(self) -> float:
        """Measure of the box."""
        return float(np.prod(self.domain[:, 1] - self.domain[:, 0]))

    @property
    def lambda_bounds(self) -> tuple[float, float]:
        """(lambda_, lambda-bar) over all regions."""
        eigenvalues = np.concatenate([region.eigenvalues for region in self.regions])
        return float(eigenvalues.min()), float(eigenvalues.max())

    def inside(self, points: np.ndarray) -> np.ndarray:
        """Mask of points in the closed domain."""
        points = np.atleast_2d(points)
        slack = BOUNDARY_TOL * (self.domain[:, 1] - self.domain[:, 0])
        above = points >= self.domain[:, 0] - slack
        below = points <= self.domain[:, 1] + slack
        return np.all(above & below, axis=1)

    def region_index(self, points: np.ndarray) -> np.ndarray:
        """Region id of each point (first matching region).

        Raises:
            ValueError: If a point is outside the domain or in no region

        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        outside = ~self.inside(points)
        if outside.any():
            point = points[np.flatnonzero(outside)[0]].tolist()
            msg = f"Point {point} is outside the domain"
            raise ValueError(msg)
        index = np.full(points.shape[0], -1, dtype=int)
        for rid, region in enumerate(self.regions):
            unassigned = index < 0
            if not unassigned.any():
                break
            hit = np.asarray(region.contains(points[unassigned]), dtype=bool)
            index[np.flatnonzero(unassigned)[hit]] = rid
        if np.any(index < 0):
            point = points[np.flatnonzero(index < 0)[0]].tolist()
            msg = f"Point {point} belongs to no region"
            raise ValueError(msg)
        return index

    def cell_regions(self, mesh: Mesh) -> np.ndarray:
        """Region id of each cell, decided at its cell point."""
        return self.region_index(mesh.cell_centers)

    def cell_diffusion(self, mesh: Mesh) -> np.ndarray:
        """Per-cell diffusion tensors, shape (n_cells, d, d)."""
        tensors = np.stack([region.diffusion for region in self.regions])
        return tensors[self.cell_regions(mesh)]

    def cell_velocity(self, mesh: Mesh) -> np.ndarray:
        """Per-cell velocities, shape (n_cells, d).

        A face on a region interface takes the velocity of the region of
        the cell the flux leaves.
        """
        vectors = np.stack([region.velocity for region in self.regions])
        return vectors[self.cell_regions(mesh)]

    def describe(self) -> dict[str, Any]:
        """Summarize the problem for run records."""
        return {
            "name": self.name,
            "domain": self.domain.tolist(),
            "storage": self.storage.name,
            "reaction": self.reaction.name,
            "regions": [region.name for region in self.regions],
            "zero_flux_sides": sorted(self.zero_flux_sides),
            "has_exact": self.exact is not None,
            "parameters": dict(self.parameters),
        }

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"ProblemSpec(name={self.name!r}, dim={self.dim}, "
            f"regions={len(self.regions)})"
        )


def side_names(dim: int) -> list[str]:
    """Return the box side labels ``x1-``, ``x1+``, ... for a dimension."""
    return [f"x{axis + 1}{sign}" for axis in range(dim) for sign in "-+"]


def boundary_modes(mesh: Mesh, spec: ProblemSpec) -> BoundaryMode:
    """Assign Dirichlet or zero-flux to every boundary face.

    A face belongs to the first box side whose plane contains its barycenter;
    faces on no side plane (meshes of non-box domains) are Dirichlet.

    Raises:
        ValueError: If the mesh dimension differs from the problem's

    """
    if mesh.dim != spec.dim:
        msg = f"Mesh dimension {mesh.dim} does not match problem dimension {spec.dim}"
        raise ValueError(msg)
    faces = mesh.boundary_faces
    centers = mesh.face_centers[faces]
    extent = spec.domain[:, 1] - spec.domain[:, 0]
    sides = np.full(faces.size, "", dtype=object)
    for axis in range(spec.dim):
        for column, sign in enumerate("-+"):
            distance = np.abs(centers[:, axis] - spec.domain[axis, column])
            on_plane = distance <= BOUNDARY_TOL * extent[axis]
            sides[(sides == "") & on_plane] = f"x{axis + 1}{sign}"
    kinds = np.where(np.isin(sides, list(spec.zero_flux_sides)), ZERO_FLUX, DIRICHLET)
    return BoundaryMode(faces=faces, sides=sides, kinds=kinds, value=spec.dirichlet)


def eval_coefficients(
    spec: ProblemSpec,
    x: np.ndarray,
    t: float,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Evaluate Lambda, V, q and the region at one point.

    Args:
        spec: Problem
        x: Point in the closed domain, shape (d,)
        t: Time

    Returns:
        (Lambda(x), V(x), q(x, t), region id)

    Raises:
        ValueError: If x is outside the domain

    """
    point = np.asarray(x, dtype=float).reshape(1, -1)
    rid = int(spec.region_index(point)[0])
    region = spec.regions[rid]
    q = float(np.asarray(spec.source(point, t)).reshape(-1)[0])
    return region.diffusion.copy(), region.velocity.copy(), q, rid
