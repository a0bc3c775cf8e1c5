"""Orchestration behind the command-line subcommands.

Each command takes a validated RunConfig, builds the problem and mesh,
runs what is asked and writes its artifacts into the output directory.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from hybridfv.exceptions import ConfigError, MeshError, RunAborted
from hybridfv.mesh.generators import generate_mesh
from hybridfv.mesh.geometry import Mesh
from hybridfv.mesh.io import read_mesh, write_mesh
from hybridfv.mesh.quality import MeshReport, validate
from hybridfv.output.recorder import RunRecorder, save_run_record
from hybridfv.output.writers import (
    write_convergence_csv,
    write_diagnostics_csv,
    write_errors_csv,
    write_gnuplot,
    write_snapshot_errors_csv,
    write_vtk,
)
from hybridfv.problem.catalog import make_custom, make_test1, make_test2
from hybridfv.problem.hypotheses import HypothesisReport, check_hypotheses
from hybridfv.problem.spec import ProblemSpec
from hybridfv.solver.engine import HybridSolver
from hybridfv.solver.state import NewtonConfig, RunResult, TimeGrid
from hybridfv.utils.config import RunConfig
from hybridfv.verification.convergence import (
    ConvergenceRow,
    ConvergenceTable,
    build_levels,
    convergence_study,
)
from hybridfv.verification.errors import (
    ErrorReport,
    error_report,
    front_track,
    has_front,
    oscillation_report,
)

logger = logging.getLogger(__name__)

# Exit status of a run whose time loop aborted
EXIT_SOLVER_FAILURE = 2

METADATA_FILE = "metadata.json"

Echo = Callable[[str], None]


@dataclass
class RunOutcome:
    """Result of ``run_command``.

    Attributes:
        status: Process exit status (0 success, 2 solver failure)
        directory: Output directory
        artifacts: Files written, in order
        result: Run result (partial on failure), None for a dry run
        report: Error report when the problem has an exact solution
        mesh_report: Mesh validation report

    """

    status: int
    directory: Path
    artifacts: list[Path] = field(default_factory=list)
    result: RunResult | None = None
    report: ErrorReport | None = None
    mesh_report: MeshReport | None = None


def build_problem(config: RunConfig) -> ProblemSpec:
    """Instantiate the configured problem."""
    problem = config.problem
    if problem.name == "test1":
        return make_test1(consistent_source=problem.consistent_source)
    if problem.name == "test2":
        return make_test2(p=problem.p, v=problem.v, delta=problem.delta)
    return make_custom(problem.custom)


def build_mesh(config: RunConfig, spec: ProblemSpec) -> Mesh:
    """Read or generate the configured mesh.

    Raises:
        ConfigError: If the resolution does not match the problem dimension
        MeshError: If the mesh cannot be built or read, or does not match
            the problem dimension

    """
    settings = config.mesh
    if settings.source == "file":
        mesh = read_mesh(settings.path)
    else:
        domain = spec.domain if settings.domain is None else np.asarray(settings.domain)
        if len(settings.resolution) != len(domain):
            raise ConfigError("mesh.resolution", _resolution_message(domain))
        mesh = generate_mesh(
            domain,
            settings.resolution,
            settings.refine_probability,
            settings.refine_seed,
            settings.refine_passes,
        )
    if mesh.dim != spec.dim:
        msg = f"Mesh dimension {mesh.dim} does not match problem dimension {spec.dim}"
        raise MeshError(msg)
    return mesh


def newton_config(config: RunConfig) -> NewtonConfig:
    """Newton settings of a run configuration."""
    solver = config.solver
    return NewtonConfig(
        atol=solver.atol,
        rtol=solver.rtol,
        max_iterations=solver.max_iterations,
        max_halvings=solver.max_halvings,
        condense=solver.condense,
        variable_switch=solver.variable_switch,
    )


def mesh_summary(mesh: Mesh, report: MeshReport | None = None) -> dict[str, Any]:
    """Sizes, provenance and (optionally) quality of a mesh."""
    summary: dict[str, Any] = {
        "dim": mesh.dim,
        "cells": mesh.n_cells,
        "faces": mesh.n_faces,
        "boundary_faces": int(mesh.boundary_faces.size),
        "provenance": dict(mesh.metadata),
    }
    if report is not None:
        summary.update(report.to_dict())
    return summary


def run_command(
    config: RunConfig, dry_run: bool = False, echo: Echo | None = None
) -> RunOutcome:
    """Run one simulation and write its artifacts.

    Writes ``metadata.json`` (echoed configuration, seeds, versions, step
    records), ``diagnostics.csv``, ``errors.csv`` and ``snapshot_errors.csv``
    when the problem has an exact solution, VTK snapshots every
    ``snapshot_stride`` steps, and gnuplot tables of the error and, for
    travelling fronts, the front position over time.

    Args:
        config: Validated configuration
        dry_run: Validate configuration and mesh and write metadata only
        echo: Progress sink (e.g. ``click.echo``)

    Returns:
        RunOutcome; ``status`` is 2 when the time loop aborted

    Raises:
        MeshError: If the mesh violates its invariants
        HybridFVError: On invalid configuration or problem data

    """
    say = echo or (lambda _message: None)
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    outcome = RunOutcome(status=0, directory=directory)

    spec = build_problem(config)
    mesh = build_mesh(config, spec)
    mesh_report = validate(mesh, _domain_measure(config, spec))
    outcome.mesh_report = mesh_report
    hypotheses = check_hypotheses(spec)

    recorder = RunRecorder()
    recorder.start_run(
        config=config.to_dict(),
        problem=spec.describe(),
        mesh=mesh_summary(mesh, mesh_report),
        seeds={
            "refine_seed": config.mesh.refine_seed,
            "refine_passes": config.mesh.refine_passes,
        },
    )
    recorder.record_event("hypotheses", hypotheses.to_dict())
    say(
        f"{spec.name}: {mesh.n_cells} cells, {mesh.n_faces} faces, "
        f"h={mesh_report.quality.h:.4g}"
    )

    if not mesh_report.ok:
        recorder.record_event("mesh_invalid", {"violations": mesh_report.violations})
        outcome.artifacts.append(_save_metadata(recorder, directory))
        msg = "Mesh violates its invariants: " + "; ".join(mesh_report.violations[:5])
        raise MeshError(msg)

    grid = TimeGrid(config.time.T, config.time.N)
    if dry_run:
        recorder.record_event("dry_run", {"time_grid": grid.to_dict()})
        outcome.artifacts.append(_save_metadata(recorder, directory))
        say("Dry run: configuration and mesh are valid")
        return outcome

    solver = HybridSolver(
        mesh, spec, grid, newton_config(config), config.solver.alpha, recorder
    )
    try:
        result = solver.run()
    except RunAborted as e:
        result = e.result
        outcome.status = EXIT_SOLVER_FAILURE
        say(f"Run aborted: {e}")
    outcome.result = result

    formats = set(config.output.formats)
    if "csv" in formats:
        outcome.artifacts.append(
            write_diagnostics_csv(directory / "diagnostics.csv", result.diagnostics)
        )
    if outcome.status == 0 and spec.exact is not None:
        outcome.report = error_report(
            result, mesh, spec, config.convergence.front_threshold
        )
        say(f"Err = {outcome.report.err:.6e}")
        outcome.artifacts.extend(
            _write_error_artifacts(outcome.report, result, mesh, spec, config)
        )
    if "vtk" in formats:
        outcome.artifacts.extend(
            _write_snapshots(
                result, mesh, spec, directory, config.output.snapshot_stride
            )
        )

    oscillation = oscillation_report(result.history)
    recorder.record_event("oscillation", oscillation.to_dict())
    recorder.record_event(
        "artifacts", {"files": [str(path) for path in outcome.artifacts]}
    )
    outcome.artifacts.append(_save_metadata(recorder, directory))
    return outcome


def convergence_command(
    config: RunConfig, echo: Echo | None = None
) -> ConvergenceTable:
    """Run the refinement study and write ``convergence.csv`` and ``convergence.dat``.

    Level 0 uses the configured resolution and N; every further level
    doubles both and uses seed + level.

    Raises:
        ConfigError: If the problem has no exact solution or the mesh
            source is a file

    """
    say = echo or (lambda _message: None)
    if config.mesh.source != "generate":
        raise ConfigError("mesh.source", "convergence studies need generated meshes")
    spec = build_problem(config)
    if spec.exact is None:
        raise ConfigError(
            "problem.custom.exact", "convergence studies need an exact solution"
        )
    domain = (
        spec.domain if config.mesh.domain is None else np.asarray(config.mesh.domain)
    )
    if len(config.mesh.resolution) != len(domain):
        raise ConfigError("mesh.resolution", _resolution_message(domain))

    levels = build_levels(
        config.mesh.resolution,
        config.convergence.levels,
        config.time.N,
        config.mesh.refine_probability,
        config.mesh.refine_seed,
        config.mesh.refine_passes,
    )
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)

    def report(row: ConvergenceRow) -> None:
        say(
            f"N={row.steps} h={row.h:.4g} elements={row.elements} "
            f"faces={row.faces} Err={row.err:.4e}"
        )

    table = convergence_study(
        spec,
        levels,
        final_time=config.time.T,
        config=newton_config(config),
        alpha=config.solver.alpha,
        domain=domain,
        on_level=report,
    )
    write_convergence_csv(directory / "convergence.csv", table)
    if "gnuplot" in config.output.formats:
        write_gnuplot(
            directory / "convergence.dat",
            ("h", "Err"),
            ((row.h, row.err) for row in table.rows),
            title=f"{spec.name}: Err versus h",
        )
    recorder = RunRecorder()
    recorder.start_run(
        config=config.to_dict(),
        problem=spec.describe(),
        seeds={"refine_seed": config.mesh.refine_seed},
    )
    recorder.record_event("convergence", table.to_dict())
    _save_metadata(recorder, directory)
    for failure in table.failures:
        say(f"Level {failure['level']} failed: {failure['error']}")
    return table


def mesh_gen_command(
    config: RunConfig, path: str | Path | None = None
) -> tuple[Mesh, Path]:
    """Generate the configured mesh and write it to ``path``.

    The default target is ``<out>/mesh.txt``.
    """
    spec = build_problem(config)
    mesh = build_mesh(config, spec)
    if path is None:
        target = Path(config.output.directory) / "mesh.txt"
    else:
        target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    write_mesh(mesh, target)
    return mesh, target


def check_command(config: RunConfig) -> tuple[MeshReport, HypothesisReport]:
    """Validate the configured mesh and sample the problem hypotheses."""
    spec = build_problem(config)
    mesh = build_mesh(config, spec)
    mesh_report = validate(mesh, _domain_measure(config, spec))
    return mesh_report, check_hypotheses(spec)


def _resolution_message(domain: np.ndarray) -> str:
    return f"needs {len(domain)} entries for a {len(domain)}-dimensional domain"


def _domain_measure(config: RunConfig, spec: ProblemSpec) -> float | None:
    if config.mesh.source != "generate":
        return None
    if config.mesh.domain is None:
        return spec.domain_measure
    bounds = np.asarray(config.mesh.domain, dtype=float)
    return float(np.prod(bounds[:, 1] - bounds[:, 0]))


def _save_metadata(recorder: RunRecorder, directory: Path) -> Path:
    path = directory / METADATA_FILE
    save_run_record(recorder, path)
    return path


def _write_error_artifacts(
    report: ErrorReport,
    result: RunResult,
    mesh: Mesh,
    spec: ProblemSpec,
    config: RunConfig,
) -> list[Path]:
    directory = Path(config.output.directory)
    formats = set(config.output.formats)
    written = []
    if "csv" in formats:
        written.append(
            write_errors_csv(directory / "errors.csv", report, config.time.N)
        )
        written.append(
            write_snapshot_errors_csv(directory / "snapshot_errors.csv", report)
        )
    if "gnuplot" in formats:
        written.append(
            write_gnuplot(
                directory / "errors.dat",
                ("t", "error"),
                zip(report.times, report.errors, strict=True),
                title=f"{spec.name}: relative L2 error versus t",
            )
        )
        if has_front(spec):
            track = front_track(result, mesh, spec, config.convergence.front_threshold)
            written.append(
                write_gnuplot(
                    directory / "front.dat",
                    ("t", "front", "exact_front"),
                    track.tolist(),
                    title=f"{spec.name}: front position versus t",
                )
            )
    return written


def _write_snapshots(
    result: RunResult,
    mesh: Mesh,
    spec: ProblemSpec,
    directory: Path,
    stride: int,
) -> list[Path]:
    regions = spec.cell_regions(mesh)
    last = result.snapshots[-1].step
    written = []
    for snapshot in result.snapshots:
        if snapshot.step % stride and snapshot.step != last:
            continue
        cells = snapshot.field.cell_values
        written.append(
            write_vtk(
                directory / f"u_{snapshot.step:05d}.vtk",
                mesh,
                snapshot.field,
                spec.storage.beta(cells),
                regions,
                title=f"{spec.name} t={snapshot.time:.6g}",
            )
        )
    return written
