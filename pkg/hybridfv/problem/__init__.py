"""PDE data and the built-in problem catalog.

Contains:
- ProblemSpec, Region, StorageLaw, ReactionLaw: coefficient bundle
- BoundaryMode, boundary_modes: Dirichlet / zero-flux assignment of boundary faces
- make_test1, make_test2, make_custom: catalog problems
- check_hypotheses, strong_residual: sampled hypothesis and exact-solution checks
"""

from hybridfv.problem.catalog import (
    STORAGE_LAWS,
    exponential_solution,
    half_sqrt_reaction,
    identity_storage,
    linear_reaction,
    make_custom,
    make_test1,
    make_test2,
    sqrt_storage,
    u_plus_sqrt_storage,
    zero_reaction,
)
from hybridfv.problem.hypotheses import (
    HypothesisReport,
    check_hypotheses,
    strong_residual,
    time_step_admissible,
)
from hybridfv.problem.spec import (
    DIRICHLET,
    ZERO_FLUX,
    BoundaryMode,
    ProblemSpec,
    ReactionLaw,
    Region,
    StorageLaw,
    boundary_modes,
    eval_coefficients,
    side_names,
)

__all__ = [
    "DIRICHLET",
    "STORAGE_LAWS",
    "ZERO_FLUX",
    "BoundaryMode",
    "HypothesisReport",
    "ProblemSpec",
    "ReactionLaw",
    "Region",
    "StorageLaw",
    "boundary_modes",
    "check_hypotheses",
    "eval_coefficients",
    "exponential_solution",
    "half_sqrt_reaction",
    "identity_storage",
    "linear_reaction",
    "make_custom",
    "make_test1",
    "make_test2",
    "side_names",
    "sqrt_storage",
    "strong_residual",
    "time_step_admissible",
    "u_plus_sqrt_storage",
    "zero_reaction",
]
