"""Command-line interface.

Contains:
- main: click group with the mesh-gen, run, convergence and check subcommands
- commands: orchestration of runs, convergence studies and mesh generation
"""

from hybridfv.cli.main import main

__all__ = ["main"]
