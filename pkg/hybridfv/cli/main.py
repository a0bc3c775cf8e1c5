"""Main CLI Entry Point.

Command-line interface for the hybrid finite volume solver.
"""

from __future__ import annotations

import logging
from pathlib import Path

import click

from hybridfv import __version__
from hybridfv.cli.commands import (
    EXIT_SOLVER_FAILURE,
    check_command,
    convergence_command,
    mesh_gen_command,
    run_command,
)
from hybridfv.exceptions import HybridFVError
from hybridfv.utils.config import Config, RunConfig

config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="JSON run configuration (defaults apply to absent keys)",
)
seed_option = click.option(
    "--seed",
    type=int,
    default=None,
    help="Mesh refinement seed (overrides mesh.refine_seed)",
)
out_option = click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Output directory (overrides output.directory)",
)
condense_option = click.option(
    "--condense",
    type=click.Choice(["on", "off"]),
    default=None,
    help="Static condensation of cell unknowns",
)
alpha_option = click.option(
    "--alpha",
    type=float,
    default=None,
    help="Stabilization parameter (default sqrt(d))",
)


def load_config(
    config_path: Path | None,
    seed: int | None = None,
    out: Path | None = None,
    condense: str | None = None,
    alpha: float | None = None,
    levels: int | None = None,
) -> RunConfig:
    """Parse the configuration file (or defaults) and apply command-line overrides.

    Raises:
        click.ClickException: If the configuration is invalid

    """
    overrides = {
        "mesh.refine_seed": seed,
        "output.directory": None if out is None else str(out),
        "solver.condense": None if condense is None else condense == "on",
        "solver.alpha": alpha,
        "convergence.levels": levels,
    }
    try:
        config = Config(config_path)
        for key, value in overrides.items():
            if value is not None:
                config.set(key, value)
        return config.to_run_config()
    except HybridFVError as e:
        raise click.ClickException(str(e)) from e


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Log solver progress to stderr")
def main(verbose: bool) -> None:
    """Hybrid finite volume solver for degenerate parabolic problems.

    Generate nonmatching meshes, run the analytical test problems or
    user-defined ones, and measure convergence against exact solutions.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command("mesh-gen")
@config_option
@seed_option
@out_option
@click.option(
    "--output",
    "-o",
    "mesh_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Mesh file to write (default <out>/mesh.txt)",
)
def mesh_gen(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    mesh_path: Path | None,
) -> None:
    """Generate the configured mesh and write it as text."""
    config = load_config(config_path, seed=seed, out=out)
    try:
        mesh, target = mesh_gen_command(config, mesh_path)
    except (HybridFVError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    click.echo(f"Wrote {mesh.n_cells} cells, {mesh.n_faces} faces to {target}")


@main.command()
@config_option
@seed_option
@out_option
@click.option(
    "--dry-run",
    is_flag=True,
    help="Validate configuration and mesh, write metadata only",
)
@condense_option
@alpha_option
@click.pass_context
def run(
    ctx: click.Context,
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    dry_run: bool,
    condense: str | None,
    alpha: float | None,
) -> None:
    """Run one simulation and write its artifacts."""
    config = load_config(
        config_path, seed=seed, out=out, condense=condense, alpha=alpha
    )
    try:
        outcome = run_command(config, dry_run=dry_run, echo=click.echo)
    except (HybridFVError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    for path in outcome.artifacts:
        click.echo(f"  {path}")
    if outcome.status:
        ctx.exit(EXIT_SOLVER_FAILURE)


@main.command()
@config_option
@seed_option
@out_option
@click.option(
    "--levels",
    type=click.IntRange(min=1),
    default=None,
    help="Number of levels (overrides convergence.levels)",
)
@condense_option
@alpha_option
def convergence(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    levels: int | None,
    condense: str | None,
    alpha: float | None,
) -> None:
    """Run a refinement study and write a convergence table."""
    config = load_config(
        config_path,
        seed=seed,
        out=out,
        condense=condense,
        alpha=alpha,
        levels=levels,
    )
    try:
        table = convergence_command(config, echo=click.echo)
    except (HybridFVError, ValueError) as e:
        raise click.ClickException(str(e)) from e

    click.echo(
        f"{'N':>6} {'h':>10} {'elements':>9} {'faces':>8} {'Err':>12} {'order':>7}"
    )
    for row in table.rows:
        order = "" if row.order is None else f"{row.order:.3f}"
        click.echo(
            f"{row.steps:>6} {row.h:>10.4g} {row.elements:>9} {row.faces:>8} "
            f"{row.err:>12.5e} {order:>7}"
        )
    if table.failures and not table.rows:
        raise click.ClickException("Every level failed")


@main.command()
@config_option
@seed_option
def check(config_path: Path | None, seed: int | None) -> None:
    """Validate the configuration, the mesh and the problem hypotheses."""
    config = load_config(config_path, seed=seed)
    try:
        mesh_report, hypotheses = check_command(config)
    except (HybridFVError, ValueError) as e:
        raise click.ClickException(str(e)) from e

    quality = mesh_report.quality
    click.echo(f"Mesh: h={quality.h:.4g}, theta={quality.theta:.4g}")
    for violation in mesh_report.violations:
        click.echo(f"  mesh violation: {violation}")
    for warning in hypotheses.warnings:
        click.echo(f"  hypothesis warning: {warning}")
    if not mesh_report.ok:
        raise click.ClickException("Mesh is invalid")
    click.echo("Configuration OK")


if __name__ == "__main__":
    main()
