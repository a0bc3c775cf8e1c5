"""Mesh/time refinement studies.

Each level doubles the base resolution and the number of time steps of
the previous one; meshes are refined at random with the level's seed.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hybridfv.exceptions import HybridFVError
from hybridfv.mesh.generators import generate_mesh
from hybridfv.mesh.quality import mesh_quality
from hybridfv.problem.spec import ProblemSpec
from hybridfv.solver.engine import HybridSolver
from hybridfv.solver.state import NewtonConfig, TimeGrid
from hybridfv.verification.errors import error_metric

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("N", "h", "elements", "faces", "Err", "order", "runtime_s")


@dataclass(frozen=True)
class LevelSpec:
    """Mesh and time grid parameters of one refinement level."""

    level: int
    resolution: tuple[int, ...]
    steps: int
    probability: float
    seed: int
    passes: int = 1

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "level": self.level,
            "resolution": list(self.resolution),
            "N": self.steps,
            "probability": self.probability,
            "seed": self.seed,
            "passes": self.passes,
        }


@dataclass
class ConvergenceRow:
    """Result of one completed level."""

    level: LevelSpec
    h: float
    elements: int
    faces: int
    err: float
    runtime: float
    order: float | None = None

    @property
    def steps(self) -> int:
        """N of the level."""
        return self.level.steps

    def to_csv(self) -> list[Any]:
        """Values in ``CSV_COLUMNS`` order; a missing order is an empty cell."""
        order = "" if self.order is None else self.order
        return [
            self.steps,
            self.h,
            self.elements,
            self.faces,
            self.err,
            order,
            self.runtime,
        ]


@dataclass
class ConvergenceTable:
    """Rows sorted by decreasing h_D, with the fitted order between neighbours.

    Attributes:
        rows: Completed levels
        failures: Levels whose run failed, with the failure message
        metadata: Problem and study parameters

    """

    rows: list[ConvergenceRow] = field(default_factory=list)
    failures: list[dict[str, Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, row: ConvergenceRow) -> None:
        """Insert a row and recompute the orders."""
        self.rows.append(row)
        self.rows.sort(key=lambda r: -r.h)
        for coarse, fine in zip(self.rows, self.rows[1:], strict=False):
            fine.order = fitted_order(coarse.err, fine.err, coarse.h, fine.h)
        if self.rows:
            self.rows[0].order = None

    @property
    def orders(self) -> list[float]:
        """Fitted orders between consecutive rows."""
        return [row.order for row in self.rows[1:] if row.order is not None]

    @property
    def finest_order(self) -> float | None:
        """Order fitted on the two finest levels."""
        return self.rows[-1].order if len(self.rows) > 1 else None

    def to_rows(self) -> list[list[Any]]:
        """CSV rows, header first."""
        return [list(CSV_COLUMNS), *(row.to_csv() for row in self.rows)]

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary for serialization."""
        return {
            "columns": list(CSV_COLUMNS),
            "rows": [
                dict(zip(CSV_COLUMNS, row.to_csv(), strict=True)) for row in self.rows
            ],
            "levels": [row.level.to_dict() for row in self.rows],
            "failures": list(self.failures),
            "metadata": dict(self.metadata),
        }


def fitted_order(
    err_coarse: float, err_fine: float, h_coarse: float, h_fine: float
) -> float | None:
    """log(Err_coarse / Err_fine) / log(h_coarse / h_fine); None if undefined."""
    if min(err_coarse, err_fine, h_coarse, h_fine) <= 0 or h_coarse == h_fine:
        return None
    return math.log(err_coarse / err_fine) / math.log(h_coarse / h_fine)


def build_levels(
    base_resolution: Sequence[int],
    levels: int,
    base_steps: int,
    probability: float,
    seed: int,
    passes: int = 1,
) -> list[LevelSpec]:
    """Refinement sequence with resolution and N doubled per level, seed + level.

    Raises:
        ValueError: If levels or base_steps is smaller than 1

    """
    if levels < 1 or base_steps < 1:
        msg = (
            "Need at least one level and one time step, "
            f"got levels={levels}, N={base_steps}"
        )
        raise ValueError(msg)
    return [
        LevelSpec(
            level=level,
            resolution=tuple(int(n) * 2**level for n in base_resolution),
            steps=base_steps * 2**level,
            probability=probability,
            seed=seed + level,
            passes=passes,
        )
        for level in range(levels)
    ]


def convergence_study(
    spec: ProblemSpec,
    levels: Sequence[LevelSpec],
    final_time: float | None = None,
    config: NewtonConfig | None = None,
    alpha: float | None = None,
    domain: np.ndarray | None = None,
    on_level: Callable[[ConvergenceRow], None] | None = None,
) -> ConvergenceTable:
    """Solve a problem on every level and tabulate Err against h_D.

    A failing level is recorded in ``failures`` and the study goes on.

    Args:
        spec: Problem with an exact solution
        levels: Refinement levels, e.g. from ``build_levels``
        final_time: T, the problem's default if None
        config: Newton settings
        alpha: Stabilization parameter
        domain: Mesh domain, the problem's domain if None
        on_level: Called with each completed row

    Returns:
        ConvergenceTable

    Raises:
        ValueError: If the problem has no exact solution or no level is given

    """
    if spec.exact is None:
        msg = f"Problem {spec.name} has no exact solution"
        raise ValueError(msg)
    if not levels:
        msg = "Convergence study needs at least one level"
        raise ValueError(msg)
    final_time = spec.final_time if final_time is None else final_time
    domain = spec.domain if domain is None else np.asarray(domain, dtype=float)
    table = ConvergenceTable(
        metadata={
            "problem": spec.describe(),
            "T": final_time,
            "alpha": alpha,
            "levels": [level.to_dict() for level in levels],
        }
    )

    for level in levels:
        mesh = generate_mesh(
            domain, level.resolution, level.probability, level.seed, level.passes
        )
        grid = TimeGrid(final_time, level.steps)
        logger.info(
            "Level %d: %d cells, %d faces, N=%d",
            level.level,
            mesh.n_cells,
            mesh.n_faces,
            level.steps,
        )
        try:
            result = HybridSolver(mesh, spec, grid, config, alpha).run()
        except HybridFVError as e:
            logger.error("Level %d failed: %s", level.level, e)
            table.failures.append({**level.to_dict(), "error": str(e)})
            continue
        row = ConvergenceRow(
            level=level,
            h=mesh_quality(mesh).h,
            elements=mesh.n_cells,
            faces=mesh.n_faces,
            err=error_metric(result.history, spec.exact, mesh, result.times),
            runtime=result.runtime,
        )
        table.add(row)
        logger.info("Level %d: h=%.4g Err=%.4e", level.level, row.h, row.err)
        if on_level:
            on_level(row)
    return table
