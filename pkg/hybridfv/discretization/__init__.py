"""Hybrid finite volume discretization.

Contains:
- DiscreteField, project: cell + face unknowns and interpolation P_D
- Stabilized discrete gradient (cell and cone values)
- CellOperator: local flux matrices A_K and convective face integrals V_K,sigma
- Diffusive and partially upwinded convective fluxes
- Bilinear forms <.,.>_F, <.,.>_T and the discrete norms
"""

from hybridfv.discretization.fields import DiscreteField, project
from hybridfv.discretization.forms import (
    bilinear_F,
    bilinear_F_from_gradients,
    bilinear_T,
    gradient_norm,
    l2_norm,
    norm_1pM,
    norm_equivalence_interval,
    seminorm_X,
)
from hybridfv.discretization.gradient import (
    GradientField,
    cell_gradient,
    gradient_consistency_error,
    gradient_field,
    stabilized_gradient,
)
from hybridfv.discretization.operator import (
    CellOperator,
    assemble_cell_operator,
    closed_form_matrix,
    convective_flux,
    diffusive_flux,
    total_fluxes,
    upwind_value,
)

__all__ = [
    "CellOperator",
    "DiscreteField",
    "GradientField",
    "assemble_cell_operator",
    "bilinear_F",
    "bilinear_F_from_gradients",
    "bilinear_T",
    "cell_gradient",
    "closed_form_matrix",
    "convective_flux",
    "diffusive_flux",
    "gradient_consistency_error",
    "gradient_field",
    "gradient_norm",
    "l2_norm",
    "norm_1pM",
    "norm_equivalence_interval",
    "project",
    "seminorm_X",
    "stabilized_gradient",
    "total_fluxes",
    "upwind_value",
]
