import pytest

from app.fixture_utils import pinched, sphere, square, torus
from app.knot_utils import KnotDiagram
from app.lattice_utils import make_cell, translate
from app.move_utils import face_move


@pytest.fixture
def sphere_knot():
    return sphere()


@pytest.fixture
def square_knot():
    return square()


@pytest.fixture
def torus_knot():
    return torus()


@pytest.fixture
def pinched_knot():
    return pinched()


@pytest.fixture
def unit_cube():
    return make_cell((0, 0, 0, 0), (1, 2, 3))


@pytest.fixture
def push_down():
    """Replace the bottom square of the unit sphere by the five other faces of the cube below it."""
    return face_move(make_cell((0, 0, -1, 0), (1, 2, 3)), [make_cell((0, 0, 0, 0), (1, 2))])


def shifted(d: KnotDiagram, vector) -> KnotDiagram:
    return KnotDiagram(d.complex.with_cells(translate(c, vector) for c in d.cells))


@pytest.fixture
def shift():
    return shifted
