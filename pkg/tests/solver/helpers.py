"""Small problems shared by the solver tests."""

from hybridfv.mesh import build_box_mesh
from hybridfv.problem import make_custom, make_test1

UNIT_SQUARE = [[0.0, 1.0], [0.0, 1.0]]


def custom_problem(**overrides):
    """2D custom problem on the unit square; keys override the defaults."""
    section = {"domain": UNIT_SQUARE, "initial": "0", "source": "1", "dirichlet": "0"}
    section.update(overrides)
    return make_custom(section)


def slab_problem():
    """First analytical problem with a coarse 2x1x1 mesh."""
    spec = make_test1()
    return spec, build_box_mesh(spec.domain, [2, 1, 1])


def square_mesh(n=4):
    """n x n mesh of the unit square."""
    return build_box_mesh(UNIT_SQUARE, [n, n])
