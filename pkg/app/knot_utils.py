"""
Cubical complexes and knot diagrams.

A ``KnotDiagram`` is a set of k-cells of Z^n with k = n - 2 (a cubical
2-knot in Z^4 or a classical cubic knot in Z^3). Validation never raises:
it returns a report whose ``failures`` explain every unmet condition.
"""

import hashlib
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from app.config import CELL_CACHE_SIZE, CELL_FILE_MAGIC, DIGEST_ALGORITHM
from app.lattice_utils import (
    LatticeCell,
    LatticeContext,
    LatticeError,
    boundary_cells,
    closure,
    cofaces,
    facets_with_signs,
    format_cell,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CellComplex:
    ctx: LatticeContext
    dim: int
    cells: FrozenSet[LatticeCell]

    def __post_init__(self):
        object.__setattr__(self, "cells", frozenset(self.cells))
        for cell in self.cells:
            if cell.dim != self.dim:
                raise LatticeError(f"cell {format_cell(cell)} has dimension {cell.dim}, complex has {self.dim}")
            if cell.ambient != self.ctx.ambient_dim:
                raise LatticeError(f"cell {format_cell(cell)} does not live in Z^{self.ctx.ambient_dim}")

    def __len__(self) -> int:
        return len(self.cells)

    def sorted_cells(self) -> List[LatticeCell]:
        return sorted(self.cells)

    @cached_property
    def faces(self) -> FrozenSet[LatticeCell]:
        """Closure: every face of every cell, all dimensions."""
        out: Set[LatticeCell] = set()
        for cell in self.cells:
            out |= closure(cell)
        return frozenset(out)

    def faces_of_dim(self, d: int) -> FrozenSet[LatticeCell]:
        return frozenset(f for f in self.faces if f.dim == d)

    def with_cells(self, cells: Iterable[LatticeCell], ctx: Optional[LatticeContext] = None) -> "CellComplex":
        return CellComplex(ctx or self.ctx, self.dim, frozenset(cells))

    def canonical_text(self) -> str:
        """Header plus one sorted cell line each; the digest is taken over this."""
        lines = [f"{CELL_FILE_MAGIC} {self.dim} {self.ctx.ambient_dim} {self.ctx.scale}"]
        lines.extend(f"cell {format_cell(c)}" for c in self.sorted_cells())
        return "\n".join(lines) + "\n"

    def digest(self, algorithm: str = DIGEST_ALGORITHM) -> str:
        return hashlib.new(algorithm, self.canonical_text().encode()).hexdigest()


class IntersectionClass(Enum):
    EMPTY = "Empty"
    VERTEX = "Vertex"
    EDGE = "Edge"
    ONE_SQUARE = "OneSquare"
    TWO_ADJACENT_SQUARES = "TwoAdjacentSquares"
    THREE_CHAINED_SQUARES = "ThreeChainedSquares"
    TWO_ADJACENT_EDGES = "TwoAdjacentEdges"
    OTHER = "Other"


TUBULAR_CLASSES = {
    2: frozenset({
        IntersectionClass.VERTEX,
        IntersectionClass.EDGE,
        IntersectionClass.ONE_SQUARE,
        IntersectionClass.TWO_ADJACENT_SQUARES,
        IntersectionClass.THREE_CHAINED_SQUARES,
    }),
    1: frozenset({
        IntersectionClass.VERTEX,
        IntersectionClass.EDGE,
        IntersectionClass.TWO_ADJACENT_EDGES,
    }),
}


@dataclass(frozen=True)
class Intersection:
    kind: IntersectionClass
    witness: Tuple[LatticeCell, ...] = ()


@dataclass(frozen=True)
class SurfaceReport:
    edge_closed: bool
    vertex_regular: bool
    connected: bool
    failures: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.edge_closed and self.vertex_regular and self.connected

    def to_dict(self) -> Dict:
        return {
            "valid": self.valid,
            "edge_closed": self.edge_closed,
            "vertex_regular": self.vertex_regular,
            "connected": self.connected,
            "failures": list(self.failures),
        }


@dataclass(frozen=True)
class KnotReport:
    dimension_ok: bool
    closed: bool
    connected: bool
    sphere: bool
    orientable: bool
    euler: int
    failures: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.dimension_ok and self.closed and self.connected and self.sphere and self.orientable

    def to_dict(self) -> Dict:
        return {
            "valid": self.valid,
            "closed": self.closed,
            "connected": self.connected,
            "sphere": self.sphere,
            "orientable": self.orientable,
            "euler": self.euler,
            "failures": list(self.failures),
        }


@dataclass(frozen=True)
class KnotDiagram:
    complex: CellComplex

    @classmethod
    def from_cells(cls, cells: Iterable[LatticeCell], ambient: int, scale: int = 1) -> "KnotDiagram":
        cells = frozenset(cells)
        return cls(CellComplex(LatticeContext(ambient, scale), ambient - 2, cells))

    @property
    def ctx(self) -> LatticeContext:
        return self.complex.ctx

    @property
    def dim(self) -> int:
        return self.complex.dim

    @property
    def cells(self) -> FrozenSet[LatticeCell]:
        return self.complex.cells

    @property
    def faces(self) -> FrozenSet[LatticeCell]:
        return self.complex.faces

    def __len__(self) -> int:
        return len(self.complex)

    def replaced(self, removed: Iterable[LatticeCell], inserted: Iterable[LatticeCell]) -> "KnotDiagram":
        return KnotDiagram(self.complex.with_cells((self.cells - frozenset(removed)) | frozenset(inserted)))

    def digest(self) -> str:
        return self.complex.digest()

    # Computed once per diagram, read many times.
    @cached_property
    def report(self) -> KnotReport:
        return validate_knot(self)

    def with_report(self, report: KnotReport) -> "KnotDiagram":
        """Seed the cached report with one derived elsewhere."""
        self.__dict__["report"] = report
        return self

    @property
    def valid(self) -> bool:
        return self.report.valid


def facet_incidence(c: CellComplex) -> Dict[LatticeCell, List[LatticeCell]]:
    """Map each (k-1)-face to the cells of the complex containing it."""
    incidence: Dict[LatticeCell, List[LatticeCell]] = defaultdict(list)
    for cell in c.cells:
        for facet in boundary_cells(cell):
            incidence[facet].append(cell)
    return incidence


def adjacency_graph(c: CellComplex) -> nx.Graph:
    """Cells as nodes, joined when they share a (k-1)-face (stored as ``facet``)."""
    graph = nx.Graph()
    graph.add_nodes_from(c.cells)
    for facet, owners in facet_incidence(c).items():
        for i, a in enumerate(owners):
            for b in owners[i + 1:]:
                graph.add_edge(a, b, facet=facet)
    return graph


def component_count(c: CellComplex) -> int:
    if not c.cells:
        return 0
    return nx.number_connected_components(adjacency_graph(c))


def face_counts(c: CellComplex) -> Tuple[int, ...]:
    counts = Counter(f.dim for f in c.faces)
    return tuple(counts.get(d, 0) for d in range(c.dim + 1))


def euler_characteristic(c: CellComplex) -> int:
    return sum((-1) ** d * n for d, n in enumerate(face_counts(c)))


@lru_cache(maxsize=CELL_CACHE_SIZE)
def _link_is_cycle(vertex: LatticeCell, squares: FrozenSet[LatticeCell]) -> bool:
    """Squares at a vertex, glued along the edges through it, must form one cycle."""
    if len(squares) < 3:
        return False
    by_edge: Dict[LatticeCell, List[LatticeCell]] = defaultdict(list)
    for square in squares:
        for edge in boundary_cells(square):
            if vertex in boundary_cells(edge):
                by_edge[edge].append(square)
    link = nx.Graph()
    link.add_nodes_from(squares)
    for owners in by_edge.values():
        if len(owners) != 2:
            return False
        link.add_edge(*owners)
    return all(d == 2 for _, d in link.degree()) and nx.is_connected(link)


def validate_closed_surface(c: CellComplex) -> SurfaceReport:
    if c.dim != 2:
        raise LatticeError(f"closed-surface validation needs squares, got dimension {c.dim}")
    failures = []
    incidence = facet_incidence(c)
    bad_edges = sorted(e for e, owners in incidence.items() if len(owners) != 2)
    edge_closed = bool(c.cells) and not bad_edges
    if not c.cells:
        failures.append("complex is empty")
    if bad_edges:
        failures.append(f"{len(bad_edges)} edge(s) not in exactly 2 squares, e.g. {format_cell(bad_edges[0])}")

    at_vertex: Dict[LatticeCell, List[LatticeCell]] = defaultdict(list)
    for square in c.cells:
        for face in closure(square):
            if face.dim == 0:
                at_vertex[face].append(square)
    irregular = sorted(v for v, squares in at_vertex.items() if not _link_is_cycle(v, frozenset(squares)))
    vertex_regular = bool(c.cells) and not irregular
    if irregular:
        failures.append(f"{len(irregular)} vertex link(s) not a single cycle, e.g. {format_cell(irregular[0])}")

    connected = bool(c.cells) and nx.is_connected(adjacency_graph(c))
    if c.cells and not connected:
        failures.append(f"square adjacency graph has {component_count(c)} components")
    return SurfaceReport(edge_closed, vertex_regular, connected, tuple(failures))


def is_orientable(c: CellComplex, root: Optional[LatticeCell] = None) -> bool:
    """Propagate orientation signs from ``root`` over shared facets; any clash means non-orientable."""
    if not c.cells:
        return True
    graph = adjacency_graph(c)
    sign_in: Dict[Tuple[LatticeCell, LatticeCell], int] = {}
    for cell in c.cells:
        for facet, s in facets_with_signs(cell):
            sign_in[(cell, facet)] = s

    orientation: Dict[LatticeCell, int] = {}
    roots = [root] if root is not None else []
    roots += sorted(c.cells)
    for start in roots:
        if start in orientation:
            continue
        orientation[start] = 1
        for a, b in nx.bfs_edges(graph, start):
            facet = graph.edges[a, b]["facet"]
            orientation[b] = -orientation[a] * sign_in[(a, facet)] * sign_in[(b, facet)]
    for a, b, facet in graph.edges(data="facet"):
        if orientation[a] * sign_in[(a, facet)] + orientation[b] * sign_in[(b, facet)] != 0:
            return False
    return True


def is_disk(cells: Iterable[LatticeCell]) -> bool:
    """Connected through facets, every facet in at most two cells, and Euler characteristic 1."""
    cells = frozenset(cells)
    if not cells:
        return False
    dim = next(iter(cells)).dim
    ambient = next(iter(cells)).ambient
    c = CellComplex(LatticeContext(ambient), dim, cells)
    if any(len(owners) > 2 for owners in facet_incidence(c).values()):
        return False
    return nx.is_connected(adjacency_graph(c)) and euler_characteristic(c) == 1


def validate_knot(d: KnotDiagram) -> KnotReport:
    c = d.complex
    failures: List[str] = []
    dimension_ok = (c.dim, c.ctx.ambient_dim) in {(2, 4), (1, 3)}
    if not dimension_ok:
        failures.append(f"a knot needs k = n - 2 with n in (3, 4); got k={c.dim}, n={c.ctx.ambient_dim}")
    euler = euler_characteristic(c)

    if c.dim == 2:
        surface = validate_closed_surface(c)
        failures.extend(surface.failures)
        closed = surface.edge_closed and surface.vertex_regular
        connected = surface.connected
        orientable = closed and is_orientable(c)
        if closed and not orientable:
            failures.append("no consistent orientation of the squares exists")
        sphere = closed and connected and orientable and euler == 2
        if closed and connected and euler != 2:
            failures.append(f"χ={euler}, a sphere needs χ=2")
    elif c.dim == 1:
        degree = Counter()
        for edge in c.cells:
            for v in boundary_cells(edge):
                degree[v] += 1
        bad = sorted(v for v, n in degree.items() if n != 2)
        closed = bool(c.cells) and not bad
        if not c.cells:
            failures.append("complex is empty")
        if bad:
            failures.append(f"{len(bad)} vertex(es) without degree 2, e.g. {format_cell(bad[0])}")
        connected = bool(c.cells) and component_count(c) == 1
        if c.cells and not connected:
            failures.append(f"edge set has {component_count(c)} components")
        orientable = True
        sphere = closed and connected
    else:
        closed = connected = sphere = orientable = False

    report = KnotReport(dimension_ok, closed, connected, sphere, orientable, euler, tuple(failures))
    if not report.valid:
        logger.debug("knot with %d cells rejected: %s", len(c), "; ".join(failures))
    return report


def faces_meeting(d: KnotDiagram, region: Iterable[LatticeCell]) -> FrozenSet[LatticeCell]:
    """Cells of ``region`` that are faces of the knot, looked up through their cofaces."""
    out: Set[LatticeCell] = set()
    for face in region:
        if face.dim == d.dim:
            if face in d.cells:
                out.add(face)
        elif face.dim < d.dim and cofaces(face, d.dim, d.ctx) & d.cells:
            out.add(face)
    return frozenset(out)


def local_failures(d: KnotDiagram, region: Iterable[LatticeCell]) -> List[str]:
    """Edge closure and vertex links (vertex degrees for curves) checked only at the faces in ``region``."""
    failures = []
    for face in sorted(region):
        if face.dim == d.dim - 1:
            owners = cofaces(face, d.dim, d.ctx) & d.cells
            if len(owners) not in (0, 2):
                failures.append(f"{format_cell(face)} lies in {len(owners)} cell(s)")
        elif face.dim == 0 and d.dim == 2:
            squares = cofaces(face, 2, d.ctx) & d.cells
            if squares and not _link_is_cycle(face, squares):
                failures.append(f"vertex link at {format_cell(face)} is not a single cycle")
    return failures


def _closure_euler(cells: Iterable[LatticeCell]) -> int:
    faces: Set[LatticeCell] = set()
    for cell in cells:
        faces |= closure(cell)
    return sum((-1) ** f.dim for f in faces)


def report_after_exchange(
    d: KnotDiagram,
    result: KnotDiagram,
    removed: FrozenSet[LatticeCell],
    inserted: FrozenSet[LatticeCell],
    region: FrozenSet[LatticeCell],
) -> KnotReport:
    """
    Report for ``result``, which is ``d`` with the disk ``removed`` exchanged
    for the disk ``inserted`` along their common boundary.

    The caller guarantees that ``d`` meets ``region`` exactly in the closure
    of ``removed``. A valid ``d`` then keeps its connectivity and orientation
    and only the faces in ``region`` are re-examined; anything else goes
    through full validation.
    """
    before = d.report
    if not before.valid or local_failures(result, region):
        return validate_knot(result)
    euler = before.euler - _closure_euler(removed) + _closure_euler(inserted)
    if d.dim == 2 and euler != 2:
        return validate_knot(result)
    return KnotReport(before.dimension_ok, True, True, True, before.orientable, euler)


def build_neighborhood(d: KnotDiagram) -> FrozenSet[LatticeCell]:
    """Top cells meeting the knot. A closed top cell meets a subcomplex iff it contains one of its vertices."""
    n = d.ctx.ambient_dim
    out: Set[LatticeCell] = set()
    for vertex in d.complex.faces_of_dim(0):
        out |= cofaces(vertex, n, d.ctx)
    return frozenset(out)


def _pairwise_share_facets(cells: List[LatticeCell]) -> bool:
    for i, a in enumerate(cells):
        for b in cells[i + 1:]:
            if len(boundary_cells(a) & boundary_cells(b)) != 1:
                return False
    return True


def classify_intersection(q: LatticeCell, d: KnotDiagram) -> Intersection:
    """Classify the subcomplex ``K ∩ q`` for a top cell q."""
    meet = sorted(faces_meeting(d, closure(q)))
    if not meet:
        return Intersection(IntersectionClass.EMPTY)
    witness = tuple(meet)
    top = [f for f in meet if f.dim == d.dim]
    if top:
        spanned: Set[LatticeCell] = set()
        for cell in top:
            spanned |= closure(cell)
        if spanned != set(meet) or not _pairwise_share_facets(top):
            return Intersection(IntersectionClass.OTHER, witness)
        if d.dim == 2:
            kinds = {1: IntersectionClass.ONE_SQUARE,
                     2: IntersectionClass.TWO_ADJACENT_SQUARES,
                     3: IntersectionClass.THREE_CHAINED_SQUARES}
        else:
            kinds = {1: IntersectionClass.EDGE, 2: IntersectionClass.TWO_ADJACENT_EDGES}
        return Intersection(kinds.get(len(top), IntersectionClass.OTHER), witness)
    edges = [f for f in meet if f.dim == 1]
    if not edges:
        kind = IntersectionClass.VERTEX if len(meet) == 1 else IntersectionClass.OTHER
        return Intersection(kind, witness)
    if len(edges) == 1 and len(meet) == 3:
        return Intersection(IntersectionClass.EDGE, witness)
    return Intersection(IntersectionClass.OTHER, witness)


def is_tubular(d: KnotDiagram) -> Tuple[bool, List[LatticeCell]]:
    allowed = TUBULAR_CLASSES.get(d.dim, frozenset())
    offending = [q for q in sorted(build_neighborhood(d)) if classify_intersection(q, d).kind not in allowed]
    if offending:
        logger.info("%d neighbourhood cell(s) break the tubular condition at scale %d", len(offending), d.ctx.scale)
    return not offending, offending
