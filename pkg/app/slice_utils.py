"""
Level-set slicing of cubulated 3-complexes in Z^5.

The last coordinate is the time axis. Vertical cells span one unit of
time, horizontal cells sit at an integer level. Half-integer slices are
2-knots in Z^4; the horizontal cells at level n form the level solid that
carries the slice below n onto the slice above n.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Set, Tuple

import networkx as nx

from app.config import SWEEP_AXIS, SWEEP_LOCAL_DEPTH, SWEEP_LOCAL_STATES, SWEEP_ORDER
from app.knot_utils import CellComplex, KnotDiagram, KnotReport
from app.lattice_utils import (
    LatticeCell,
    LatticeContext,
    LatticeError,
    boundary_cells,
    closure,
    drop_axis,
    format_cell,
)
from app.move_utils import MoveSequence, chain_order, empty_sequence, sweep

logger = logging.getLogger(__name__)

TIME_AXIS = 5


class InvalidSlice(ValueError):
    def __init__(self, t: float, report: KnotReport):
        super().__init__(f"slice at t={t} is not a 2-knot: " + "; ".join(report.failures))
        self.t = t
        self.report = report


class StructureError(ValueError):
    """The complex does not behave like a cubulated isotopy cylinder."""


class Orientation(Enum):
    HORIZONTAL = "Horizontal"
    VERTICAL = "Vertical"


class SquareType(Enum):
    T_MINUS = "TMinus"
    T_PLUS = "TPlus"
    T_BOTH = "TBoth"
    T_NONE = "TNone"


class LevelSolid(NamedTuple):
    solid: FrozenSet[LatticeCell]
    skin: FrozenSet[LatticeCell]


@dataclass(frozen=True)
class SlicedComplex:
    complex: CellComplex
    level_range: Tuple[int, int]

    @classmethod
    def from_complex(cls, c: CellComplex) -> "SlicedComplex":
        if c.dim != 3 or c.ctx.ambient_dim != 5:
            raise StructureError(f"a cylinder needs 3-cells in Z^5, got k={c.dim}, n={c.ctx.ambient_dim}")
        starts = [level_of(cell) for cell in c.cells if cell_orientation(cell) is Orientation.VERTICAL]
        if not starts:
            raise StructureError("cylinder has no vertical cells")
        return cls(c, (min(starts), max(starts) + 1))

    @property
    def ctx(self) -> LatticeContext:
        return self.complex.ctx

    @property
    def cells(self) -> FrozenSet[LatticeCell]:
        return self.complex.cells


@dataclass(frozen=True)
class SlicedReport:
    dimension_ok: bool
    levels_ok: bool
    slices_ok: bool
    levels_connected: bool
    failures: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.dimension_ok and self.levels_ok and self.slices_ok and self.levels_connected

    def to_dict(self) -> Dict:
        return {
            "valid": self.valid,
            "dimension_ok": self.dimension_ok,
            "levels_ok": self.levels_ok,
            "slices_ok": self.slices_ok,
            "levels_connected": self.levels_connected,
            "failures": list(self.failures),
        }


def cell_orientation(c: LatticeCell) -> Orientation:
    if c.ambient != TIME_AXIS:
        raise LatticeError(f"orientation is defined in Z^5, cell lives in Z^{c.ambient}")
    return Orientation.VERTICAL if TIME_AXIS in c.axes else Orientation.HORIZONTAL


def level_of(c: LatticeCell) -> int:
    return c.anchor[TIME_AXIS - 1]


def project(c: LatticeCell) -> LatticeCell:
    """Drop the time coordinate."""
    return drop_axis(c, TIME_AXIS)


def _slab(J: SlicedComplex, t: float) -> int:
    if float(t).is_integer():
        raise LatticeError(f"slices are taken at non-integer levels, got {t}")
    m1, m2 = J.level_range
    return min(max(math.floor(t), m1), m2 - 1)


def slice_cells(J: SlicedComplex, t: float) -> FrozenSet[LatticeCell]:
    """Squares of Z^4 cut out by the vertical cells spanning the slab around t; only floor(t) matters."""
    slab = _slab(J, t)
    return frozenset(
        project(c) for c in J.cells
        if cell_orientation(c) is Orientation.VERTICAL and level_of(c) == slab
    )


def slice_at(J: SlicedComplex, t: float) -> KnotDiagram:
    d = KnotDiagram.from_cells(slice_cells(J, t), ambient=4, scale=J.ctx.scale)
    if not d.valid:
        raise InvalidSlice(t, d.report)
    return d


def _time_face(c: LatticeCell, top: bool) -> LatticeCell:
    anchor = list(c.anchor)
    if top:
        anchor[TIME_AXIS - 1] += 1
    return LatticeCell(tuple(anchor), tuple(a for a in c.axes if a != TIME_AXIS))


def _check_level(J: SlicedComplex, n: int) -> None:
    m1, m2 = J.level_range
    if not m1 <= n <= m2:
        raise LatticeError(f"level {n} outside the level range [{m1}, {m2}]")


def level_solid(J: SlicedComplex, n: int) -> LevelSolid:
    """Horizontal 3-cells at level n and every square of J lying in that level."""
    _check_level(J, n)
    solid = frozenset(
        c for c in J.cells
        if cell_orientation(c) is Orientation.HORIZONTAL and level_of(c) == n
    )
    skin: Set[LatticeCell] = set()
    for c in solid:
        skin |= boundary_cells(c)
    for c in J.cells:
        if cell_orientation(c) is Orientation.VERTICAL:
            if level_of(c) == n - 1:
                skin.add(_time_face(c, top=True))
            elif level_of(c) == n:
                skin.add(_time_face(c, top=False))
    return LevelSolid(solid, frozenset(skin))


def classify_square_types(J: SlicedComplex, n: int) -> Dict[LatticeCell, SquareType]:
    _, skin = level_solid(J, n)
    below = {_time_face(c, top=True) for c in J.cells
             if cell_orientation(c) is Orientation.VERTICAL and level_of(c) == n - 1}
    above = {_time_face(c, top=False) for c in J.cells
             if cell_orientation(c) is Orientation.VERTICAL and level_of(c) == n}
    types = {}
    for square in skin:
        if square in below and square in above:
            types[square] = SquareType.T_BOTH
        elif square in below:
            types[square] = SquareType.T_MINUS
        elif square in above:
            types[square] = SquareType.T_PLUS
        else:
            types[square] = SquareType.T_NONE
    return types


def knot_from_types(types: Dict[LatticeCell, SquareType], side: SquareType, scale: int = 1) -> KnotDiagram:
    """K_{n-} from TMinus and TBoth squares, K_{n+} from TPlus and TBoth."""
    keep = {side, SquareType.T_BOTH}
    return KnotDiagram.from_cells((project(s) for s, t in types.items() if t in keep), ambient=4, scale=scale)


def level_components(J: SlicedComplex, n: int) -> List[List[LatticeCell]]:
    """Cubes of the level solid grouped by connection through shared squares, projected to Z^4."""
    solid, _ = level_solid(J, n)
    cubes = sorted(project(c) for c in solid)
    graph = nx.Graph()
    graph.add_nodes_from(cubes)
    owners: Dict[LatticeCell, List[LatticeCell]] = {}
    for cube in cubes:
        for square in boundary_cells(cube):
            owners.setdefault(square, []).append(cube)
    for shared in owners.values():
        for a, b in zip(shared, shared[1:]):
            graph.add_edge(a, b)
    return sorted((sorted(comp) for comp in nx.connected_components(graph)), key=lambda comp: comp[0])


def carry_level(
    J: SlicedComplex,
    n: int,
    axis: int = SWEEP_AXIS,
    order: str = SWEEP_ORDER,
    local_depth: int = SWEEP_LOCAL_DEPTH,
    local_states: int = SWEEP_LOCAL_STATES,
) -> MoveSequence:
    """Certificate carrying the slice below level n onto the slice above it, one solid component at a time."""
    minus = slice_at(J, n - 0.5)
    plus = slice_at(J, n + 0.5)
    if minus.cells == plus.cells:
        return empty_sequence(minus)

    components = level_components(J, n)
    if not components:
        raise StructureError(f"slices around level {n} differ but the level holds no solid")

    certificate = empty_sequence(minus)
    current = minus
    for index, cubes in enumerate(components):
        skin: Set[LatticeCell] = set()
        for cube in cubes:
            skin |= boundary_cells(cube)
        goal = KnotDiagram(current.complex.with_cells((current.cells - skin) | (plus.cells & skin)))
        if goal.cells == current.cells:
            continue
        leaving = current.cells - plus.cells
        seeds = [c for c in cubes if boundary_cells(c) & leaving]
        chain = chain_order(cubes, seeds, axis=axis, order=order)
        logger.debug("level %d component %d: %d cube(s)", n, index, len(chain))
        part = sweep(current, chain, goal, local_depth=local_depth, local_states=local_states)
        certificate = certificate.extended(part)
        current = goal

    if current.cells != plus.cells:
        raise StructureError(
            f"level {n}: sweeping every solid component leaves {len(current.cells ^ plus.cells)} cell(s) unmatched"
        )
    logger.info("level %d carried with %d move(s)", n, len(certificate))
    return certificate


def carry_full(J: SlicedComplex, **options) -> MoveSequence:
    """Concatenate the per-level certificates from the bottom slice to the top slice."""
    m1, m2 = J.level_range
    certificate = empty_sequence(slice_at(J, m1 + 0.5))
    for n in range(m1 + 1, m2):
        part = carry_level(J, n, **options)
        if part.initial.digest() != certificate.final_digest:
            raise StructureError(f"slice below level {n} does not match the slice above level {n - 1}")
        certificate = certificate.extended(part)
    return certificate


def _level_set_connected(J: SlicedComplex, n: int) -> bool:
    solid, skin = level_solid(J, n)
    pieces = sorted(solid | skin)
    if not pieces:
        return False
    graph = nx.Graph()
    graph.add_nodes_from(pieces)
    at_vertex: Dict[LatticeCell, List[LatticeCell]] = {}
    for piece in pieces:
        for face in closure(piece):
            if face.dim == 0:
                at_vertex.setdefault(face, []).append(piece)
    for touching in at_vertex.values():
        for a, b in zip(touching, touching[1:]):
            graph.add_edge(a, b)
    return nx.is_connected(graph)


def validate_sliced(J: SlicedComplex) -> SlicedReport:
    failures: List[str] = []
    dimension_ok = J.complex.dim == 3 and J.ctx.ambient_dim == 5
    if not dimension_ok:
        failures.append(f"expected 3-cells in Z^5, got k={J.complex.dim}, n={J.ctx.ambient_dim}")
        return SlicedReport(False, False, False, False, tuple(failures))

    m1, m2 = J.level_range
    stray = sorted(c for c in J.cells
                   if cell_orientation(c) is Orientation.HORIZONTAL and not m1 < level_of(c) < m2)
    levels_ok = not stray
    if stray:
        failures.append(f"horizontal cell {format_cell(stray[0])} lies outside the open level range ({m1}, {m2})")

    slices_ok = True
    for slab in range(m1, m2):
        try:
            slice_at(J, slab + 0.5)
        except InvalidSlice as exc:
            slices_ok = False
            failures.append(str(exc))

    disconnected = [n for n in range(m1, m2 + 1) if not _level_set_connected(J, n)]
    if disconnected:
        failures.append(f"level set(s) {disconnected} not connected")
    return SlicedReport(dimension_ok, levels_ok, slices_ok, not disconnected, tuple(failures))


def lift_cells(cells: Iterable[LatticeCell], level: int, vertical: bool) -> FrozenSet[LatticeCell]:
    """Place Z^4 cells at a level of Z^5, optionally extended one unit in time."""
    axes_extra = (TIME_AXIS,) if vertical else ()
    return frozenset(LatticeCell(c.anchor + (level,), c.axes + axes_extra) for c in cells)
