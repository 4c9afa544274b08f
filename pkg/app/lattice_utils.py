"""
Cells of the canonical cubulation of Z^n at any subdivision scale.

A cell is stored as its minimal corner (``anchor``) plus the ascending
1-based list of axes along which it extends by one lattice unit. Every
query below reduces to integer arithmetic on those two tuples.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import FrozenSet, Iterable, Iterator, List, Optional, Tuple

from app.config import CELL_CACHE_SIZE, COORDINATE_LIMIT, SUPPORTED_AMBIENTS

logger = logging.getLogger(__name__)


class LatticeError(ValueError):
    """Raised for malformed cells or out-of-range arguments."""


class CoordinateOverflow(LatticeError):
    """Raised when a coordinate leaves the supported integer range."""


@dataclass(frozen=True, order=True)
class LatticeCell:
    anchor: Tuple[int, ...]
    axes: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.anchor)
        if n == 0:
            raise LatticeError("cell needs at least one coordinate")
        if len(self.axes) > n:
            raise LatticeError(f"cell has {len(self.axes)} axes in ambient dimension {n}")
        if any(b <= a for a, b in zip(self.axes, self.axes[1:])):
            raise LatticeError(f"axes must be strictly ascending, got {list(self.axes)}")
        if self.axes and (self.axes[0] < 1 or self.axes[-1] > n):
            raise LatticeError(f"axes must lie in 1..{n}, got {list(self.axes)}")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def ambient(self) -> int:
        return len(self.anchor)

    def interval(self, coordinate: int) -> Tuple[int, int]:
        """Closed extent along a 1-based coordinate."""
        lo = self.anchor[coordinate - 1]
        return (lo, lo + 1) if coordinate in self.axes else (lo, lo)

    def __str__(self) -> str:
        return format_cell(self)


@dataclass(frozen=True)
class LatticeContext:
    ambient_dim: int
    scale: int = 1

    def __post_init__(self):
        if self.ambient_dim not in SUPPORTED_AMBIENTS:
            raise LatticeError(f"ambient dimension must be one of {SUPPORTED_AMBIENTS}, got {self.ambient_dim}")
        if self.scale < 1:
            raise LatticeError(f"scale must be >= 1, got {self.scale}")

    def refine(self, m: int) -> "LatticeContext":
        return LatticeContext(self.ambient_dim, self.scale * m)


@dataclass(frozen=True)
class Adjacency:
    """Dimension of the largest common face of two equal-dimension cells."""

    dim: int
    shared_dim: Optional[int]
    equal: bool = False

    @property
    def disjoint(self) -> bool:
        return self.shared_dim is None

    @property
    def is_facet(self) -> bool:
        return not self.equal and self.shared_dim is not None and self.shared_dim == self.dim - 1

    @property
    def kind(self) -> str:
        if self.equal:
            return "Equal"
        if self.disjoint:
            return "Disjoint"
        if self.is_facet:
            return "SharedFacet"
        return ("SharedVertex", "SharedEdge", "SharedSquare", "SharedCube", "SharedHypercube")[self.shared_dim]

    def __str__(self) -> str:
        if self.equal or self.disjoint:
            return self.kind
        return f"{self.kind}(dim {self.shared_dim})"


def make_cell(anchor: Iterable[int], axes: Iterable[int] = ()) -> LatticeCell:
    return LatticeCell(tuple(int(x) for x in anchor), tuple(int(a) for a in axes))


def format_cell(cell: LatticeCell) -> str:
    """Text form shared by every file format: ``x1 ... xn : a1 ... ak``."""
    coords = " ".join(str(x) for x in cell.anchor)
    axes = " ".join(str(a) for a in cell.axes)
    return f"{coords} : {axes}".rstrip()


def check_coordinates(anchor: Tuple[int, ...], limit: int = COORDINATE_LIMIT) -> None:
    for x in anchor:
        if abs(x) > limit:
            logger.error("coordinate %d outside +/-%d", x, limit)
            raise CoordinateOverflow(f"coordinate {x} exceeds the supported range +/-{limit}")


def _shifted(anchor: Tuple[int, ...], coordinate: int, delta: int) -> Tuple[int, ...]:
    if delta == 0:
        return anchor
    out = list(anchor)
    out[coordinate - 1] += delta
    return tuple(out)


def facets_with_signs(cell: LatticeCell) -> Iterator[Tuple[LatticeCell, int]]:
    """Yield the 2k facets together with their incidence sign in the oriented boundary."""
    for position, axis in enumerate(cell.axes):
        rest = cell.axes[:position] + cell.axes[position + 1:]
        sign = 1 if position % 2 == 0 else -1
        yield LatticeCell(cell.anchor, rest), -sign
        yield LatticeCell(_shifted(cell.anchor, axis, 1), rest), sign


@lru_cache(maxsize=CELL_CACHE_SIZE)
def boundary_cells(cell: LatticeCell) -> FrozenSet[LatticeCell]:
    if cell.dim == 0:
        raise LatticeError("vertex has no boundary")
    return frozenset(facet for facet, _ in facets_with_signs(cell))


@lru_cache(maxsize=CELL_CACHE_SIZE)
def closure(cell: LatticeCell) -> FrozenSet[LatticeCell]:
    """All faces of every dimension, the cell included (3^k cells)."""
    faces = set()
    for choice in itertools.product((None, 0, 1), repeat=cell.dim):
        anchor = list(cell.anchor)
        axes = []
        for axis, pick in zip(cell.axes, choice):
            if pick is None:
                axes.append(axis)
            else:
                anchor[axis - 1] += pick
        faces.add(LatticeCell(tuple(anchor), tuple(axes)))
    return frozenset(faces)


def is_face_of(face: LatticeCell, cell: LatticeCell) -> bool:
    """Point-set containment of two cells of the same cubulation."""
    if face.ambient != cell.ambient or face.dim > cell.dim:
        return False
    for coordinate in range(1, cell.ambient + 1):
        f_lo, f_hi = face.interval(coordinate)
        c_lo, c_hi = cell.interval(coordinate)
        if f_lo < c_lo or f_hi > c_hi:
            return False
    return True


@lru_cache(maxsize=CELL_CACHE_SIZE)
def cofaces(cell: LatticeCell, j: int, ctx: LatticeContext) -> FrozenSet[LatticeCell]:
    """All j-cells of the full cubulation having ``cell`` as a face."""
    n = ctx.ambient_dim
    if cell.ambient != n:
        raise LatticeError(f"cell lives in Z^{cell.ambient}, context is Z^{n}")
    if j <= cell.dim or j > n:
        raise LatticeError(f"coface dimension must satisfy {cell.dim} < j <= {n}, got {j}")
    free = [a for a in range(1, n + 1) if a not in cell.axes]
    out = set()
    for extra in itertools.combinations(free, j - cell.dim):
        axes = tuple(sorted(cell.axes + extra))
        for offsets in itertools.product((0, -1), repeat=len(extra)):
            anchor = list(cell.anchor)
            for axis, delta in zip(extra, offsets):
                anchor[axis - 1] += delta
            out.add(LatticeCell(tuple(anchor), axes))
    return frozenset(out)


def coface_count(n: int, k: int, j: int) -> int:
    return comb(n - k, j - k) * 2 ** (j - k)


def subdivide_cell(cell: LatticeCell, m: int, limit: int = COORDINATE_LIMIT) -> FrozenSet[LatticeCell]:
    """The m^k congruent cells of ``cell`` in the lattice rescaled by m."""
    if m < 2:
        raise LatticeError(f"subdivision factor must be >= 2, got {m}")
    base = tuple(x * m for x in cell.anchor)
    check_coordinates(base, limit)
    out = set()
    for offsets in itertools.product(range(m), repeat=cell.dim):
        anchor = list(base)
        for axis, delta in zip(cell.axes, offsets):
            anchor[axis - 1] += delta
        out.add(LatticeCell(tuple(anchor), cell.axes))
    check_coordinates(tuple(x + m for x in base), limit)
    return frozenset(out)


def common_face(a: LatticeCell, b: LatticeCell) -> Optional[LatticeCell]:
    """The intersection of two closed cells, itself a cell, or None."""
    if a.ambient != b.ambient:
        raise LatticeError("cells live in different ambient dimensions")
    anchor: List[int] = []
    axes: List[int] = []
    for coordinate in range(1, a.ambient + 1):
        a_lo, a_hi = a.interval(coordinate)
        b_lo, b_hi = b.interval(coordinate)
        lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
        if lo > hi:
            return None
        anchor.append(lo)
        if hi > lo:
            axes.append(coordinate)
    return LatticeCell(tuple(anchor), tuple(axes))


def cells_adjacent(a: LatticeCell, b: LatticeCell) -> Adjacency:
    if a.dim != b.dim:
        raise LatticeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a == b:
        return Adjacency(a.dim, a.dim, equal=True)
    shared = common_face(a, b)
    return Adjacency(a.dim, None if shared is None else shared.dim)


def translate(cell: LatticeCell, vector: Iterable[int]) -> LatticeCell:
    shift = tuple(vector)
    if len(shift) != cell.ambient:
        raise LatticeError(f"translation has {len(shift)} components, cell lives in Z^{cell.ambient}")
    return LatticeCell(tuple(x + d for x, d in zip(cell.anchor, shift)), cell.axes)


def drop_axis(cell: LatticeCell, axis: int) -> LatticeCell:
    """Project away one coordinate; higher axes are renumbered down by one."""
    if not 1 <= axis <= cell.ambient:
        raise LatticeError(f"axis {axis} outside 1..{cell.ambient}")
    anchor = cell.anchor[:axis - 1] + cell.anchor[axis:]
    axes = tuple(a if a < axis else a - 1 for a in cell.axes if a != axis)
    return LatticeCell(anchor, axes)
