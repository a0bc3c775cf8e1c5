"""Sampled checks of the structural hypotheses of a problem.

Violations are reported and logged as warnings; they never stop a run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hybridfv.problem.spec import ProblemSpec

logger = logging.getLogger(__name__)

# Relative slack of sampled inequalities
SAMPLE_TOL = 1e-12

# Factor by which the sampled range is widened to test global claims
GLOBAL_RANGE_FACTOR = 10.0


@dataclass
class HypothesisReport:
    """Outcome of ``check_hypotheses``.

    Attributes:
        checks: Named checks and whether they passed on the sample
        warnings: Human-readable violations
        details: Sampled constants (observed slopes, eigenvalues, ...)

    """

    checks: dict[str, bool] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """Whether no warning was raised."""
        return not self.warnings

    def warn(self, message: str) -> None:
        """Record and log a violation."""
        self.warnings.append(message)
        logger.warning(message)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "checks": dict(self.checks),
            "warnings": list(self.warnings),
            "details": dict(self.details),
        }


def check_hypotheses(
    spec: ProblemSpec,
    values: np.ndarray | None = None,
    points: np.ndarray | None = None,
) -> HypothesisReport:
    """Sample the hypotheses on beta, Lambda and F.

    Args:
        spec: Problem to check
        values: Sorted value grid for beta and F; defaults to 401 points on
            the storage law's sample range
        points: Points for the region partition check; defaults to a
            regular 9^d grid of the domain

    Returns:
        HypothesisReport; every violation is also logged as a warning

    """
    report = HypothesisReport()
    storage, reaction = spec.storage, spec.reaction
    if values is None:
        grid = np.linspace(*storage.sample_range, 401)
    else:
        grid = np.sort(np.asarray(values, dtype=float))

    # beta: beta(0) = 0, strictly increasing, slope >= beta_ on the sample
    beta0 = float(storage.beta(np.array([0.0]))[0])
    report.checks["beta(0)=0"] = beta0 == 0.0
    if beta0 != 0.0:
        report.warn(f"beta(0) = {beta0} is not zero")
    slopes = _difference_quotients(storage.beta, grid)
    report.details["beta_min_slope"] = float(slopes.min()) if slopes.size else None
    increasing = bool(np.all(slopes > 0))
    report.checks["beta increasing"] = increasing
    if not increasing:
        report.warn("beta is not strictly increasing on the sampled grid")
    slope_ok = bool(np.all(slopes >= storage.lower_slope * (1 - SAMPLE_TOL)))
    report.checks["beta lower slope"] = slope_ok
    if not slope_ok:
        report.warn(
            f"beta lower slope {storage.lower_slope} violated on "
            f"[{grid[0]}, {grid[-1]}] (observed {slopes.min():.6g})"
        )
    else:
        reach = GLOBAL_RANGE_FACTOR * max(1.0, float(np.abs(grid).max()))
        wide = _difference_quotients(storage.beta, np.linspace(-reach, reach, 2001))
        global_ok = bool(np.all(wide >= storage.lower_slope * (1 - SAMPLE_TOL)))
        report.checks["beta lower slope (global)"] = global_ok
        if not global_ok:
            report.warn(
                f"beta lower slope {storage.lower_slope} holds on "
                f"[{grid[0]}, {grid[-1]}] only "
                f"(observed {wide.min():.6g} on [{-reach}, {reach}])"
            )

    # phi inverts beta
    roundtrip = np.abs(storage.inverse(storage.beta(grid)) - grid)
    inverse_ok = bool(np.all(roundtrip <= SAMPLE_TOL * np.maximum(1.0, np.abs(grid))))
    report.checks["phi(beta(u))=u"] = inverse_ok
    report.details["inverse_max_error"] = float(roundtrip.max())
    if not inverse_ok:
        report.warn(f"phi(beta(u)) differs from u by up to {roundtrip.max():.3e}")

    # F: F(0) = 0 and the one-sided decrease bound
    f0 = float(reaction.function(np.array([0.0]))[0])
    report.checks["F(0)=0"] = f0 == 0.0
    if f0 != 0.0:
        report.warn(f"F(0) = {f0} is not zero")
    f_slopes = _difference_quotients(reaction.function, grid)
    if reaction.monotone:
        monotone = bool(np.all(f_slopes >= -SAMPLE_TOL))
        report.checks["F nondecreasing"] = monotone
        if not monotone:
            report.warn("F is declared nondecreasing but decreases on the sampled grid")
    elif reaction.decrease_rate is not None:
        bounded = bool(np.all(f_slopes >= -reaction.decrease_rate * (1 + SAMPLE_TOL)))
        report.checks["F decrease rate"] = bounded
        if not bounded:
            report.warn(
                f"F decreases faster than the declared rate {reaction.decrease_rate}"
            )

    # Lambda: symmetric, positive eigenvalues
    for region in spec.regions:
        tensor = region.diffusion
        atol = SAMPLE_TOL * np.abs(tensor).max()
        symmetric = bool(np.allclose(tensor, tensor.T, rtol=0.0, atol=atol))
        eigenvalues = region.eigenvalues
        report.checks[f"Lambda symmetric [{region.name}]"] = symmetric
        report.checks[f"Lambda positive [{region.name}]"] = bool(eigenvalues[0] > 0)
        report.details[f"Lambda eigenvalues [{region.name}]"] = eigenvalues.tolist()
        if not symmetric:
            report.warn(f"Diffusion tensor of region {region.name} is not symmetric")
        if eigenvalues[0] <= 0:
            report.warn(
                f"Diffusion tensor of region {region.name} has eigenvalue "
                f"{eigenvalues[0]:.6g} <= 0"
            )
    report.details["lambda_bounds"] = list(spec.lambda_bounds)

    # Regions cover the domain without gaps
    if points is None:
        axes = [np.linspace(lo, hi, 9) for lo, hi in spec.domain]
        grid_points = np.meshgrid(*axes, indexing="ij")
        points = np.stack(grid_points, axis=-1).reshape(-1, spec.dim)
    try:
        spec.region_index(points)
        report.checks["regions exhaustive"] = True
    except ValueError as e:
        report.checks["regions exhaustive"] = False
        report.warn(f"Region partition is not exhaustive: {e}")

    return report


def time_step_admissible(spec: ProblemSpec, dt: float) -> bool:
    """Check dt < beta_ / F_ for a non-monotone reaction (always true otherwise)."""
    reaction = spec.reaction
    if reaction.monotone or not reaction.decrease_rate:
        return True
    return dt < spec.storage.lower_slope / reaction.decrease_rate


def strong_residual(
    spec: ProblemSpec, points: np.ndarray, t: float, step: float = 1e-2
) -> np.ndarray:
    """Residual of the exact solution in the strong form of the equation.

    Derivatives are fourth-order central differences with spacing ``step``;
    coefficients are those of each point's region (constant there, so
    div(V u) = V . grad u).

    Raises:
        ValueError: If the problem has no exact solution

    """
    if spec.exact is None:
        msg = f"Problem {spec.name} has no exact solution"
        raise ValueError(msg)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exact, storage = spec.exact, spec.storage
    dim = spec.dim
    weights = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))

    def shifted(axis: int, offset: float) -> np.ndarray:
        moved = points.copy()
        moved[:, axis] += offset
        return moved

    def d_dt() -> np.ndarray:
        total = sum(w * storage.beta(exact(points, t + k * step)) for k, w in weights)
        return total / (12.0 * step)

    def d_dx(axis: int, at: np.ndarray | None = None) -> np.ndarray:
        base = points if at is None else at
        total = np.zeros(base.shape[0])
        for k, w in weights:
            moved = base.copy()
            moved[:, axis] += k * step
            total += w * exact(moved, t)
        return total / (12.0 * step)

    def d2_dx2(axis: int) -> np.ndarray:
        stencil = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))
        total = sum(w * exact(shifted(axis, k * step), t) for k, w in stencil)
        return total / (12.0 * step**2)

    def d2_dxdy(i: int, j: int) -> np.ndarray:
        total = np.zeros(points.shape[0])
        for k, w in weights:
            moved = points.copy()
            moved[:, i] += k * step
            total += w * d_dx(j, moved)
        return total / (12.0 * step)

    regions = spec.region_index(points)
    diffusion = np.stack([r.diffusion for r in spec.regions])[regions]
    velocity = np.stack([r.velocity for r in spec.regions])[regions]

    residual = d_dt()
    for i in range(dim):
        residual = residual + velocity[:, i] * d_dx(i)
        for j in range(dim):
            second = d2_dx2(i) if i == j else d2_dxdy(i, j)
            residual = residual - diffusion[:, i, j] * second
    u = exact(points, t)
    source = np.asarray(spec.source(points, t), dtype=float)
    return residual + spec.reaction.function(u) - source


def _difference_quotients(function: Any, grid: np.ndarray) -> np.ndarray:
    values = np.asarray(function(grid), dtype=float)
    return np.diff(values) / np.diff(grid)
