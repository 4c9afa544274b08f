from collections import Counter

import pytest

from app.fixture_utils import product_cylinder, shift_cylinder
from app.knot_utils import CellComplex, KnotDiagram
from app.lattice_utils import LatticeContext, LatticeError, boundary_cells, make_cell
from app.search_utils import replay
from app.slice_utils import (
    InvalidSlice,
    Orientation,
    SlicedComplex,
    SquareType,
    StructureError,
    carry_full,
    carry_level,
    cell_orientation,
    classify_square_types,
    knot_from_types,
    level_components,
    level_solid,
    lift_cells,
    project,
    slice_at,
    validate_sliced,
)


@pytest.fixture
def product(sphere_knot):
    return SlicedComplex.from_complex(product_cylinder(sphere_knot, 3))


@pytest.fixture
def shifted_cylinder(sphere_knot):
    return SlicedComplex.from_complex(shift_cylinder(sphere_knot, axis=4))


@pytest.fixture
def two_pushes(sphere_knot):
    """Bottom and top squares pushed along e4 at the same level: two separate solid components."""
    bottom = make_cell((0, 0, 0, 0), (1, 2, 4))
    top = make_cell((0, 0, 1, 0), (1, 2, 4))
    after = set(sphere_knot.cells)
    for cube in (bottom, top):
        after ^= boundary_cells(cube)
    cells = lift_cells(sphere_knot.cells, 0, vertical=True)
    cells |= lift_cells([bottom, top], 1, vertical=False)
    cells |= lift_cells(after, 1, vertical=True)
    return SlicedComplex.from_complex(CellComplex(LatticeContext(5), 3, cells))


def test_orientation():
    assert cell_orientation(make_cell((0, 0, 0, 0, 0), (1, 2, 5))) is Orientation.VERTICAL
    assert cell_orientation(make_cell((0, 0, 0, 0, 1), (1, 2, 3))) is Orientation.HORIZONTAL
    with pytest.raises(LatticeError):
        cell_orientation(make_cell((0, 0, 0, 0), (1, 2, 3)))


def test_product_slices_equal_the_sphere(product, sphere_knot):
    assert product.level_range == (0, 3)
    for t in (0.5, 1.5, 2.5):
        assert slice_at(product, t).cells == sphere_knot.cells


def test_product_squares_are_all_both_types(product):
    for n in (1, 2):
        types = classify_square_types(product, n)
        assert len(types) == 6
        assert set(types.values()) == {SquareType.T_BOTH}


def test_product_carries_with_no_moves(product):
    assert len(carry_level(product, 1)) == 0
    assert len(carry_full(product)) == 0


def test_slices_need_non_integer_levels(product):
    with pytest.raises(LatticeError):
        slice_at(product, 1)


def test_slices_outside_range_clamp(product):
    assert slice_at(product, -3.5).cells == slice_at(product, 0.5).cells
    assert slice_at(product, 7.25).cells == slice_at(product, 2.5).cells


def test_invalid_slice_is_reported(sphere_knot):
    cells = set(product_cylinder(sphere_knot, 2).cells)
    cells.discard(make_cell((0, 0, 0, 0, 1), (1, 2, 5)))
    J = SlicedComplex.from_complex(CellComplex(LatticeContext(5), 3, cells))
    with pytest.raises(InvalidSlice) as excinfo:
        slice_at(J, 1.5)
    assert not excinfo.value.report.valid
    report = validate_sliced(J)
    assert not report.slices_ok
    assert not report.valid


def test_cylinder_needs_vertical_cells():
    flat = CellComplex(LatticeContext(5), 3, frozenset([make_cell((0, 0, 0, 0, 1), (1, 2, 3))]))
    with pytest.raises(StructureError):
        SlicedComplex.from_complex(flat)


def test_product_is_sliced_by_connected_level_sets(product):
    report = validate_sliced(product)
    assert report.valid
    assert report.to_dict()["failures"] == []


def test_horizontal_cells_on_the_boundary_levels_are_rejected(sphere_knot):
    cells = set(product_cylinder(sphere_knot, 2).cells)
    cells.add(make_cell((0, 0, 0, 0, 0), (1, 2, 3)))
    report = validate_sliced(SlicedComplex.from_complex(CellComplex(LatticeContext(5), 3, cells)))
    assert not report.levels_ok
    assert not report.valid


def test_shift_cylinder_levels(shifted_cylinder, sphere_knot, shift):
    assert shifted_cylinder.level_range == (0, 2)
    assert slice_at(shifted_cylinder, 0.5).cells == sphere_knot.cells
    assert slice_at(shifted_cylinder, 1.5).cells == shift(sphere_knot, (0, 0, 0, 1)).cells
    solid, skin = level_solid(shifted_cylinder, 1)
    assert len(solid) == 6
    assert len(skin) == 24


def test_shift_cylinder_square_types(shifted_cylinder):
    counts = Counter(classify_square_types(shifted_cylinder, 1).values())
    assert counts == {SquareType.T_MINUS: 6, SquareType.T_PLUS: 6, SquareType.T_NONE: 12}


def test_types_rebuild_the_neighbouring_slices(shifted_cylinder):
    types = classify_square_types(shifted_cylinder, 1)
    assert knot_from_types(types, SquareType.T_MINUS).cells == slice_at(shifted_cylinder, 0.5).cells
    assert knot_from_types(types, SquareType.T_PLUS).cells == slice_at(shifted_cylinder, 1.5).cells


def test_shift_cylinder_carry_replays(shifted_cylinder, sphere_knot, shift):
    certificate = carry_full(shifted_cylinder)
    assert len(certificate) > 0
    assert certificate.final_digest == shift(sphere_knot, (0, 0, 0, 1)).digest()
    assert replay(certificate)


def test_shift_along_a_surface_axis(sphere_knot, shift):
    J = SlicedComplex.from_complex(shift_cylinder(sphere_knot, axis=1))
    assert len(level_solid(J, 1).solid) == 2
    certificate = carry_level(J, 1)
    assert certificate.final_digest == shift(sphere_knot, (1, 0, 0, 0)).digest()
    assert replay(certificate)


def test_level_range_is_checked(shifted_cylinder):
    with pytest.raises(LatticeError):
        level_solid(shifted_cylinder, 5)


def test_two_components_are_swept_separately(two_pushes):
    assert len(level_components(two_pushes, 1)) == 2
    counts = Counter(classify_square_types(two_pushes, 1).values())
    assert counts == {SquareType.T_MINUS: 2, SquareType.T_PLUS: 10, SquareType.T_BOTH: 4}
    assert len(slice_at(two_pushes, 1.5)) == 14
    certificate = carry_level(two_pushes, 1)
    assert [mv.carrier for mv in certificate.face_moves] == [
        make_cell((0, 0, 0, 0), (1, 2, 4)),
        make_cell((0, 0, 1, 0), (1, 2, 4)),
    ]
    assert validate_sliced(two_pushes).valid


def test_product_needs_a_level(sphere_knot):
    with pytest.raises(LatticeError):
        product_cylinder(sphere_knot, 0)


def test_cylinders_need_two_knots(square_knot):
    with pytest.raises(LatticeError):
        product_cylinder(square_knot)


def test_sliced_complex_exposes_cells(product):
    assert len(product.cells) == 18
    assert product.ctx.ambient_dim == 5
    assert isinstance(slice_at(product, 0.5), KnotDiagram)


def test_level_pinched_at_a_vertex_is_not_a_slice(pinched_knot):
    J = SlicedComplex.from_complex(CellComplex(LatticeContext(5), 3, lift_cells(pinched_knot.cells, 0, vertical=True)))
    with pytest.raises(InvalidSlice) as excinfo:
        slice_at(J, 0.5)
    assert not excinfo.value.report.closed
    assert any("vertex link" in f for f in excinfo.value.report.failures)
    assert not validate_sliced(J).slices_ok


def test_band_joining_two_components_is_never_removed(two_pushes):
    types = classify_square_types(two_pushes, 1)
    band = {project(s) for s, t in types.items() if t is SquareType.T_BOTH}
    assert len(band) == 4
    band_edges = set()
    for square in band:
        band_edges |= boundary_cells(square)
    for cubes in level_components(two_pushes, 1):
        skin = set()
        for cube in cubes:
            skin |= boundary_cells(cube)
        assert any(boundary_cells(square) & band_edges for square in skin)

    certificate = carry_level(two_pushes, 1)
    assert all(not mv.removed & band for mv in certificate.face_moves)
    assert band <= slice_at(two_pushes, 1.5).cells
    assert replay(certificate)
