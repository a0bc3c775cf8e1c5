"""Built-in problems and coefficient laws.

Laws are odd-extended to negative arguments so that slightly negative
iterates remain admissible.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from hybridfv.problem.spec import ProblemSpec, ReactionLaw, Region, StorageLaw
from hybridfv.utils.expression import parse_expression

# Floor of |u| inside derivatives that are singular at u = 0
SINGULAR_FLOOR = 1e-300

TEST1_DOMAIN = ((0.0, 2.0), (0.0, 1.0), (0.0, 1.0))
TEST1_RIGHT_DIFFUSION = ((8.0, -5.0, -2.0), (-5.0, 20.0, -7.0), (-2.0, -7.0, 19.0))
TEST2_DOMAIN = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


def _odd_sqrt(u: np.ndarray) -> np.ndarray:
    return np.sign(u) * np.sqrt(np.abs(u))


def identity_storage() -> StorageLaw:
    """beta(u) = u."""
    return StorageLaw(
        name="identity",
        beta=lambda u: np.asarray(u, dtype=float) * 1.0,
        inverse=lambda w: np.asarray(w, dtype=float) * 1.0,
        derivative=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        inverse_derivative=lambda w: np.ones_like(np.asarray(w, dtype=float)),
        lower_slope=1.0,
        sample_range=(-10.0, 10.0),
    )


def sqrt_storage() -> StorageLaw:
    """beta(u) = sign(u) |u|^(1/2), phi(w) = sign(w) w^2.

    beta'(0) is infinite while phi'(0) = 0; the slope bound 1/2 holds on
    [-1, 1] only.
    """

    def derivative(u: np.ndarray) -> np.ndarray:
        return 0.5 / np.sqrt(np.maximum(np.abs(u), SINGULAR_FLOOR))

    return StorageLaw(
        name="sqrt",
        beta=_odd_sqrt,
        inverse=lambda w: np.sign(w) * np.asarray(w, dtype=float) ** 2,
        derivative=derivative,
        inverse_derivative=lambda w: 2.0 * np.abs(w),
        lower_slope=0.5,
        sample_range=(-1.0, 1.0),
    )


def u_plus_sqrt_storage() -> StorageLaw:
    """beta(u) = u + sign(u) |u|^(1/2), so beta' >= 1 everywhere."""

    def inverse(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        # s = sqrt|u| solves s^2 + s = |w|
        root = 2.0 * np.abs(w) / (1.0 + np.sqrt(1.0 + 4.0 * np.abs(w)))
        return np.sign(w) * root**2

    def derivative(u: np.ndarray) -> np.ndarray:
        return 1.0 + 0.5 / np.sqrt(np.maximum(np.abs(u), SINGULAR_FLOOR))

    def inverse_derivative(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        root = 2.0 * np.abs(w) / (1.0 + np.sqrt(1.0 + 4.0 * np.abs(w)))
        return 2.0 * root / (2.0 * root + 1.0)

    return StorageLaw(
        name="u_plus_sqrt",
        beta=lambda u: np.asarray(u, dtype=float) + _odd_sqrt(u),
        inverse=inverse,
        derivative=derivative,
        inverse_derivative=inverse_derivative,
        lower_slope=1.0,
        sample_range=(-10.0, 10.0),
    )


STORAGE_LAWS = {
    "identity": identity_storage,
    "sqrt": sqrt_storage,
    "u_plus_sqrt": u_plus_sqrt_storage,
}


def zero_reaction() -> ReactionLaw:
    """F = 0."""
    return ReactionLaw(
        name="zero",
        function=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        derivative=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        lipschitz=0.0,
    )


def half_sqrt_reaction() -> ReactionLaw:
    """F(u) = sign(u) |u|^(1/2) / 2, nondecreasing."""
    return ReactionLaw(
        name="half_sqrt",
        function=lambda u: 0.5 * _odd_sqrt(u),
        derivative=lambda u: 0.25 / np.sqrt(np.maximum(np.abs(u), SINGULAR_FLOOR)),
    )


def linear_reaction(coefficient: float) -> ReactionLaw:
    """F(u) = c u; nondecreasing for c >= 0, otherwise F_ = -c."""
    c = float(coefficient)
    return ReactionLaw(
        name="linear",
        function=lambda u: c * np.asarray(u, dtype=float),
        derivative=lambda u: np.full_like(np.asarray(u, dtype=float), c),
        monotone=c >= 0,
        decrease_rate=None if c >= 0 else -c,
        lipschitz=abs(c),
    )


def _whole_domain(points: np.ndarray) -> np.ndarray:
    return np.ones(np.atleast_2d(points).shape[0], dtype=bool)


def exponential_solution(points: np.ndarray, t: float) -> np.ndarray:
    """u(x, t) = exp(x1 + x2 + x3 - t - 3)."""
    x = np.atleast_2d(points)
    return np.exp(x[:, 0] + x[:, 1] + x[:, 2] - t - 3)


def make_test1(consistent_source: bool = True) -> ProblemSpec:
    """Discontinuous anisotropic diffusion with an exponential solution.

    On (0,2)x(0,1)x(0,1), beta(u) = u + u^(1/2), F(u) = u^(1/2)/2. For
    x1 <= 1: Lambda = Id, V = (4, 0, 0); for x1 > 1: the anisotropic
    tensor of ``TEST1_RIGHT_DIFFUSION`` and V = (4, 7, 7). The normal
    trace of V is continuous across x1 = 1. Dirichlet data is the exact
    trace on the whole boundary.

    Args:
        consistent_source: Add q = -2u on x1 > 1, which makes the exponential
            an exact solution in both regions (with q = 0 the right region's
            data leave a residual of -2u). False gives q = 0 everywhere.

    Returns:
        ProblemSpec of the first analytical test

    """
    left = Region(
        name="x1<=1",
        contains=lambda x: np.atleast_2d(x)[:, 0] <= 1.0,
        diffusion=np.eye(3),
        velocity=np.array([4.0, 0.0, 0.0]),
    )
    right = Region(
        name="x1>1",
        contains=lambda x: np.atleast_2d(x)[:, 0] > 1.0,
        diffusion=np.array(TEST1_RIGHT_DIFFUSION),
        velocity=np.array([4.0, 7.0, 7.0]),
    )

    def source(points: np.ndarray, t: float) -> np.ndarray:
        x = np.atleast_2d(points)
        if not consistent_source:
            return np.zeros(x.shape[0])
        return np.where(x[:, 0] > 1.0, -2.0 * exponential_solution(x, t), 0.0)

    return ProblemSpec(
        name="test1",
        domain=np.array(TEST1_DOMAIN),
        storage=u_plus_sqrt_storage(),
        reaction=half_sqrt_reaction(),
        regions=(left, right),
        source=source,
        initial=lambda points: exponential_solution(points, 0.0),
        dirichlet=exponential_solution,
        exact=exponential_solution,
        final_time=1.0,
        parameters={"consistent_source": consistent_source},
    )


def make_test2(p: float = 0.2, v: float = 0.8, delta: float = 0.01) -> ProblemSpec:
    """Traveling wave of d(u^(1/2))/dt - delta Lap u + v du/dx1 = 0.

    The exact solution is u = (1 - exp(a (x1 - v t - p)))^2 with a = v / (2 delta)
    behind the front x1 = v t + p and 0 beyond it. Dirichlet data on
    x1 = 0 and x1 = 1, zero flux on the other sides of the unit cube.

    Raises:
        ValueError: If delta or v is not positive

    """
    if delta <= 0 or v <= 0:
        msg = f"Traveling wave needs delta > 0 and v > 0, got delta={delta}, v={v}"
        raise ValueError(msg)
    rate = v / (2.0 * delta)

    def exact(points: np.ndarray, t: float) -> np.ndarray:
        x = np.atleast_2d(points)
        shift = x[:, 0] - v * t - p
        # exp is only evaluated behind the front
        wave = (1 - np.exp(rate * np.minimum(shift, 0.0))) ** 2
        return np.where(shift <= 0.0, wave, 0.0)

    region = Region(
        name="all",
        contains=_whole_domain,
        diffusion=delta * np.eye(3),
        velocity=np.array([v, 0.0, 0.0]),
    )
    return ProblemSpec(
        name="test2",
        domain=np.array(TEST2_DOMAIN),
        storage=sqrt_storage(),
        reaction=zero_reaction(),
        regions=(region,),
        source=lambda points, t: np.zeros(np.atleast_2d(points).shape[0]),
        initial=lambda points: exact(points, 0.0),
        dirichlet=exact,
        exact=exact,
        zero_flux_sides=frozenset({"x2-", "x2+", "x3-", "x3+"}),
        final_time=1.0,
        parameters={"p": p, "v": v, "delta": delta, "rate": rate},
    )


CUSTOM_PARAMETERS = ("storage", "reaction", "source", "initial", "dirichlet", "exact")


def make_custom(custom: dict[str, Any]) -> ProblemSpec:
    """Build a single-region problem from a validated ``problem.custom`` section.

    Args:
        custom: Section with storage/reaction law names, constant diffusion
            and velocity, domain, zero-flux sides and expression strings for
            source, initial, dirichlet and (optionally) exact

    Returns:
        ProblemSpec named ``custom``

    """
    domain = np.asarray(custom["domain"], dtype=float)
    storage = STORAGE_LAWS[custom.get("storage", "identity")]()
    reaction_name = custom.get("reaction", "zero")
    if reaction_name == "linear":
        reaction = linear_reaction(custom.get("reaction_coefficient", 0.0))
    elif reaction_name == "half_sqrt":
        reaction = half_sqrt_reaction()
    else:
        reaction = zero_reaction()

    source = parse_expression(custom.get("source") or "0")
    initial = parse_expression(custom["initial"])
    exact = parse_expression(custom["exact"]) if custom.get("exact") else None
    dirichlet_text = custom.get("dirichlet") or custom.get("exact") or "0"
    dirichlet = parse_expression(dirichlet_text)

    dim = domain.shape[0]
    region = Region(
        name="all",
        contains=_whole_domain,
        diffusion=np.asarray(custom.get("diffusion", np.eye(dim)), dtype=float),
        velocity=np.asarray(custom.get("velocity", np.zeros(dim)), dtype=float),
    )
    return ProblemSpec(
        name="custom",
        domain=domain,
        storage=storage,
        reaction=reaction,
        regions=(region,),
        source=lambda points, t: source(points, t),
        initial=lambda points: initial(points, 0.0),
        dirichlet=lambda points, t: dirichlet(points, t),
        exact=None if exact is None else (lambda points, t: exact(points, t)),
        zero_flux_sides=frozenset(custom.get("zero_flux_sides", [])),
        parameters={key: custom.get(key) for key in CUSTOM_PARAMETERS},
    )
