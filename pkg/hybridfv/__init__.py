"""
Hybrid Finite Volume Package

A finite volume solver for degenerate parabolic convection-reaction-diffusion
equations on general, possibly nonmatching, polyhedral meshes:
- Hybrid (cell + face unknown) discretization with stabilized discrete gradients
- Partial upwinding of the convective term
- Fully implicit time stepping with Newton variable switching
- Static condensation of cell unknowns
- Verification harness for analytical test problems
"""

__version__ = "0.1.0"
__author__ = "topherhaynie"

from hybridfv.mesh.geometry import Mesh
from hybridfv.problem.spec import ProblemSpec
from hybridfv.solver.engine import HybridSolver

__all__ = ["HybridSolver", "Mesh", "ProblemSpec", "__version__"]
