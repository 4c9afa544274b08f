"""Built-in knots and cylinders used by `gen`, the explorer and the tests."""

import logging
import os
from typing import Dict, FrozenSet, Iterable, Optional, Set

from app.config import FIXTURE_DIR
from app.io_utils import parse_cell_file
from app.knot_utils import CellComplex, KnotDiagram
from app.lattice_utils import LatticeCell, LatticeContext, LatticeError, boundary_cells, make_cell, translate
from app.move_utils import subdivide_knot
from app.slice_utils import TIME_AXIS, lift_cells

logger = logging.getLogger(__name__)


def boundary_of_cubes(cubes: Iterable[LatticeCell]) -> FrozenSet[LatticeCell]:
    """Facets lying on an odd number of the given cells."""
    counts: Dict[LatticeCell, int] = {}
    for cube in cubes:
        for facet in boundary_cells(cube):
            counts[facet] = counts.get(facet, 0) + 1
    return frozenset(f for f, n in counts.items() if n % 2)


def _scaled(d: KnotDiagram, scale: int) -> KnotDiagram:
    return d if scale == 1 else subdivide_knot(d, scale)


def sphere(scale: int = 1) -> KnotDiagram:
    """Boundary of the unit 3-cube in the hyperplane x4 = 0: six squares."""
    cube = make_cell((0, 0, 0, 0), (1, 2, 3))
    return _scaled(KnotDiagram.from_cells(boundary_cells(cube), ambient=4), scale)


def square(scale: int = 1) -> KnotDiagram:
    """The classical unknot: four edges around the unit square of Z^3."""
    return _scaled(KnotDiagram.from_cells(boundary_cells(make_cell((0, 0, 0), (1, 2))), ambient=3), scale)


def torus(scale: int = 1) -> KnotDiagram:
    """Boundary of a 3x3x1 block of cubes with the centre cube removed (32 squares, χ=0)."""
    cubes = [make_cell((i, j, 0, 0), (1, 2, 3)) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    return _scaled(KnotDiagram.from_cells(boundary_of_cubes(cubes), ambient=4), scale)


def pinched(scale: int = 1) -> KnotDiagram:
    """Two cube boundaries meeting in the single vertex (1, 1, 1, 0)."""
    cubes = [make_cell((0, 0, 0, 0), (1, 2, 3)), make_cell((1, 1, 1, 0), (1, 2, 3))]
    cells = boundary_cells(cubes[0]) | boundary_cells(cubes[1])
    return _scaled(KnotDiagram.from_cells(cells, ambient=4), scale)


def _require_surface(d: KnotDiagram) -> None:
    if d.dim != 2 or d.ctx.ambient_dim != 4:
        raise LatticeError(f"cylinders are built from 2-knots in Z^4, got k={d.dim}, n={d.ctx.ambient_dim}")


def product_cylinder(d: KnotDiagram, levels: int = 3) -> CellComplex:
    """d x [0, levels]: only vertical cells, every slice equal to d."""
    _require_surface(d)
    if levels < 1:
        raise LatticeError(f"a cylinder needs at least one level, got {levels}")
    cells: Set[LatticeCell] = set()
    for t in range(levels):
        cells |= lift_cells(d.cells, t, vertical=True)
    return CellComplex(LatticeContext(5, d.ctx.scale), 3, frozenset(cells))


def _trace(cells: Iterable[LatticeCell], axis: int, direction: int) -> FrozenSet[LatticeCell]:
    """Cubes swept by squares moving one unit along ``axis``; squares parallel to the motion sweep nothing."""
    out = set()
    for cell in cells:
        if axis in cell.axes:
            continue
        anchor = list(cell.anchor)
        if direction < 0:
            anchor[axis - 1] -= 1
        out.add(LatticeCell(tuple(anchor), tuple(sorted(cell.axes + (axis,)))))
    return frozenset(out)


def shift_cylinder(d: KnotDiagram, axis: int = 4, offset: int = 1) -> CellComplex:
    """
    Cylinder of the translation of d by ``offset`` units along ``axis``.

    Each unit step gets its own level: the vertical slab below level n holds
    the knot before the step, the horizontal cubes at level n hold the region
    the step sweeps across.
    """
    _require_surface(d)
    if not 1 <= axis <= 4:
        raise LatticeError(f"shift axis must lie in 1..4, got {axis}")
    if offset == 0:
        raise LatticeError("shift offset must be nonzero")
    direction = 1 if offset > 0 else -1
    unit = tuple(direction if i == axis - 1 else 0 for i in range(4))

    cells: Set[LatticeCell] = set()
    current = frozenset(d.cells)
    for level in range(abs(offset)):
        cells |= lift_cells(current, level, vertical=True)
        cells |= lift_cells(_trace(current, axis, direction), level + 1, vertical=False)
        current = frozenset(translate(c, unit) for c in current)
    cells |= lift_cells(current, abs(offset), vertical=True)
    logger.debug("shift cylinder along axis %d by %d: %d cells", axis, offset, len(cells))
    return CellComplex(LatticeContext(TIME_AXIS, d.ctx.scale), 3, frozenset(cells))


BUILTIN_KNOTS = {
    "sphere": sphere,
    "square": square,
    "torus": torus,
    "pinched": pinched,
}


def load_fixture(name: str, fixture_dir: Optional[str] = None) -> Optional[CellComplex]:
    """Look for ``<name>.cells`` in the fixture directory; None when absent."""
    directory = fixture_dir if fixture_dir is not None else FIXTURE_DIR
    if not directory:
        return None
    path = os.path.join(directory, f"{name}.cells")
    if not os.path.isfile(path):
        return None
    logger.info("using fixture file %s", path)
    with open(path, encoding="utf-8") as handle:
        return parse_cell_file(handle.read())
