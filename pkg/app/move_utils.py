"""
Cubulated moves: M1 subdivision and M2 face boundary exchange.

An M2 move lives on a (k+1)-cell ``carrier``; it removes a disk ``A`` of
k-cells of the carrier's boundary and inserts the complementary disk ``B``.
Legality is strict: the knot must meet the closed carrier in exactly the
closure of ``A``, and the exchanged diagram must still validate.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from app.config import CELL_CACHE_SIZE, SWEEP_AXIS, SWEEP_LOCAL_DEPTH, SWEEP_LOCAL_STATES, SWEEP_ORDER
from app.knot_utils import KnotDiagram, faces_meeting, is_disk, report_after_exchange
from app.lattice_utils import (
    LatticeCell,
    LatticeError,
    boundary_cells,
    closure,
    cofaces,
    format_cell,
    subdivide_cell,
    translate,
)

logger = logging.getLogger(__name__)


class IllegalMove(ValueError):
    def __init__(self, reason: str, index: Optional[int] = None):
        super().__init__(reason if index is None else f"step {index}: {reason}")
        self.reason = reason
        self.index = index


class Stuck(ValueError):
    def __init__(self, index: int, diagnostic: str):
        super().__init__(f"sweep stuck at solid {index}: {diagnostic}")
        self.index = index
        self.diagnostic = diagnostic


@dataclass(frozen=True)
class Subdivision:
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise LatticeError(f"subdivision factor must be >= 2, got {self.m}")


@dataclass(frozen=True)
class FaceBoundaryMove:
    carrier: LatticeCell
    removed: FrozenSet[LatticeCell]
    inserted: FrozenSet[LatticeCell]

    def __post_init__(self):
        object.__setattr__(self, "removed", frozenset(self.removed))
        object.__setattr__(self, "inserted", frozenset(self.inserted))

    @property
    def sort_key(self) -> Tuple:
        return (self.carrier, tuple(sorted(self.removed)))

    def __str__(self) -> str:
        return f"M2 on [{format_cell(self.carrier)}]: {len(self.removed)} -> {len(self.inserted)}"


Step = Union[Subdivision, FaceBoundaryMove]


@dataclass(frozen=True)
class Legality:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class MoveSequence:
    initial: KnotDiagram
    steps: Tuple[Step, ...]
    final_digest: str

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def face_moves(self) -> List[FaceBoundaryMove]:
        return [s for s in self.steps if isinstance(s, FaceBoundaryMove)]

    def extended(self, other: "MoveSequence") -> "MoveSequence":
        """Concatenate a certificate that starts where this one ends."""
        if other.initial.digest() != self.final_digest:
            raise ValueError("certificates do not chain: endpoint digests differ")
        return MoveSequence(self.initial, self.steps + other.steps, other.final_digest)


def empty_sequence(d: KnotDiagram) -> MoveSequence:
    return MoveSequence(d, (), d.digest())


def face_move(carrier: LatticeCell, removed: Iterable[LatticeCell]) -> FaceBoundaryMove:
    """Build the move that swaps ``removed`` for the rest of the carrier's boundary."""
    removed = frozenset(removed)
    boundary = boundary_cells(carrier)
    if not removed <= boundary:
        stray = sorted(removed - boundary)[0]
        raise IllegalMove(f"cell {format_cell(stray)} is not on the boundary of [{format_cell(carrier)}]")
    return FaceBoundaryMove(carrier, removed, boundary - removed)


def invert(mv: FaceBoundaryMove) -> FaceBoundaryMove:
    return FaceBoundaryMove(mv.carrier, mv.inserted, mv.removed)


@lru_cache(maxsize=CELL_CACHE_SIZE)
def malformation(mv: FaceBoundaryMove) -> Optional[str]:
    """Why the move breaks its structural invariants, or None."""
    if mv.carrier.dim == 0:
        return "carrier is a vertex"
    boundary = boundary_cells(mv.carrier)
    if mv.removed & mv.inserted:
        return "removed and inserted cells overlap"
    if mv.removed | mv.inserted != boundary:
        return "removed and inserted cells do not partition the carrier boundary"
    if not is_disk(mv.removed):
        return "removed cells are not a disk"
    if not is_disk(mv.inserted):
        return "inserted cells are not a disk"
    return None


def _local_reason(d: KnotDiagram, mv: FaceBoundaryMove) -> Optional[str]:
    if mv.carrier.dim != d.dim + 1 or mv.carrier.ambient != d.ctx.ambient_dim:
        return f"carrier must be a {d.dim + 1}-cell of Z^{d.ctx.ambient_dim}"
    problem = malformation(mv)
    if problem:
        return f"malformed: {problem}"
    expected: Set[LatticeCell] = set()
    for cell in mv.removed:
        expected |= closure(cell)
    touching = faces_meeting(d, closure(mv.carrier))
    if touching != expected:
        extra = sorted(touching - expected)
        missing = sorted(expected - touching)
        if missing:
            return f"removed cell {format_cell(missing[0])} is not in the knot"
        return f"knot touches the carrier outside the removed disk at {format_cell(extra[0])}"
    return None


def checked_exchange(d: KnotDiagram, mv: FaceBoundaryMove) -> Tuple[Legality, Optional[KnotDiagram]]:
    """Legality of ``mv`` on ``d`` and, when legal, the exchanged diagram with its report attached."""
    reason = _local_reason(d, mv)
    if reason:
        return Legality(False, reason), None
    return _exchange_locally_legal(d, mv)


def _exchange_locally_legal(d: KnotDiagram, mv: FaceBoundaryMove) -> Tuple[Legality, Optional[KnotDiagram]]:
    result = d.replaced(mv.removed, mv.inserted)
    report = report_after_exchange(d, result, mv.removed, mv.inserted, closure(mv.carrier))
    if not report.valid:
        return Legality(False, "result is not a knot: " + "; ".join(report.failures)), None
    return Legality(True), result.with_report(report)


def is_legal(d: KnotDiagram, mv: FaceBoundaryMove) -> Legality:
    return checked_exchange(d, mv)[0]


def apply_move(d: KnotDiagram, mv: FaceBoundaryMove) -> KnotDiagram:
    verdict, result = checked_exchange(d, mv)
    if not verdict:
        raise IllegalMove(verdict.reason)
    return result


def translate_move(mv: FaceBoundaryMove, vector: Sequence[int]) -> FaceBoundaryMove:
    return FaceBoundaryMove(
        translate(mv.carrier, vector),
        frozenset(translate(c, vector) for c in mv.removed),
        frozenset(translate(c, vector) for c in mv.inserted),
    )


def subdivide_knot(d: KnotDiagram, m: int) -> KnotDiagram:
    cells: Set[LatticeCell] = set()
    for cell in d.cells:
        cells |= subdivide_cell(cell, m)
    return KnotDiagram(d.complex.with_cells(cells, d.ctx.refine(m)))


def apply_step(d: KnotDiagram, step: Step) -> KnotDiagram:
    if isinstance(step, Subdivision):
        return subdivide_knot(d, step.m)
    return apply_move(d, step)


def replay_steps(initial: KnotDiagram, steps: Iterable[Step]) -> KnotDiagram:
    """Apply steps in order with legality re-checked; IllegalMove carries the step index."""
    current = initial
    for index, step in enumerate(steps):
        try:
            current = apply_step(current, step)
        except IllegalMove as exc:
            raise IllegalMove(exc.reason, index) from exc
    return current


def candidate_carriers(d: KnotDiagram) -> List[LatticeCell]:
    carriers: Set[LatticeCell] = set()
    for cell in d.cells:
        carriers |= cofaces(cell, d.dim + 1, d.ctx)
    return sorted(carriers)


def candidate_face_moves(d: KnotDiagram) -> List[FaceBoundaryMove]:
    """Moves passing the local checks, carrier order. The knot must meet the carrier in A, so one per carrier."""
    out = []
    for carrier in candidate_carriers(d):
        mv = face_move(carrier, boundary_cells(carrier) & d.cells)
        if mv.inserted and _local_reason(d, mv) is None:
            out.append(mv)
    return out


def legal_exchanges(d: KnotDiagram) -> List[Tuple[FaceBoundaryMove, KnotDiagram]]:
    """Every legal move in carrier order, paired with the diagram it produces."""
    out = []
    for mv in candidate_face_moves(d):
        verdict, result = _exchange_locally_legal(d, mv)
        if verdict:
            out.append((mv, result))
    return out


def enumerate_face_moves(d: KnotDiagram) -> List[FaceBoundaryMove]:
    return [mv for mv, _ in legal_exchanges(d)]


def _shared_facet(a: LatticeCell, b: LatticeCell) -> Optional[LatticeCell]:
    shared = boundary_cells(a) & boundary_cells(b)
    return next(iter(shared)) if shared else None


def chain_order(
    solids: Iterable[LatticeCell],
    seeds: Iterable[LatticeCell] = (),
    axis: int = SWEEP_AXIS,
    order: str = SWEEP_ORDER,
) -> List[LatticeCell]:
    """
    Arrange solids as a walk through shared facets.

    Base order sorts by the projection on ``axis``, then lexicographically.
    The walk starts at the first seed, moves to the first unvisited neighbour
    of the current solid (with ``order="parallel"`` a neighbour whose shared
    facet is parallel to the previously crossed one wins), and otherwise
    resumes from any solid touching the visited region.
    """
    if order not in ("levels", "parallel"):
        raise ValueError(f"unknown sweep order {order!r}")
    base = sorted(set(solids), key=lambda c: (c.anchor[axis - 1], c.anchor, c.axes))
    if not base:
        return []
    rank = {c: i for i, c in enumerate(base)}
    seed_set = set(seeds)
    start = next((c for c in base if c in seed_set), base[0])

    neighbours: Dict[LatticeCell, List[Tuple[LatticeCell, LatticeCell]]] = {c: [] for c in base}
    by_facet: Dict[LatticeCell, List[LatticeCell]] = {}
    for cell in base:
        for facet in boundary_cells(cell):
            by_facet.setdefault(facet, []).append(cell)
    for facet, owners in by_facet.items():
        for a in owners:
            for b in owners:
                if a != b:
                    neighbours[a].append((b, facet))

    walk = [start]
    visited = {start}
    crossed: Optional[LatticeCell] = None
    while len(walk) < len(base):
        current = walk[-1]
        options = sorted((rank[b], b, f) for b, f in neighbours[current] if b not in visited)
        if order == "parallel" and crossed is not None:
            parallel = [o for o in options if o[2].axes == crossed.axes]
            options = parallel or options
        if options:
            _, nxt, crossed = options[0]
        else:
            touching = [c for c in base if c not in visited and any(b in visited for b, _ in neighbours[c])]
            nxt = touching[0] if touching else next(c for c in base if c not in visited)
            crossed = None
        walk.append(nxt)
        visited.add(nxt)
    return walk


def _star(solid: LatticeCell, d: KnotDiagram) -> List[LatticeCell]:
    """(k+1)-cells sharing a k-face with ``solid``."""
    star: Set[LatticeCell] = set()
    for facet in boundary_cells(solid):
        star |= cofaces(facet, solid.dim, d.ctx)
    star.discard(solid)
    return sorted(star)


def _distance_after_exchange(d: KnotDiagram, solid: LatticeCell, target: KnotDiagram) -> Optional[int]:
    """Cells still differing from ``target`` once the solid is exchanged, or None if the exchange is illegal."""
    boundary = boundary_cells(solid)
    removed = d.cells & boundary
    if not removed or removed == target.cells & boundary:
        return len(d.cells ^ target.cells)
    mv = face_move(solid, removed)
    if not mv.inserted:
        return None
    verdict, result = checked_exchange(d, mv)
    if not verdict:
        return None
    return len(result.cells ^ target.cells)


def _unlock(
    d: KnotDiagram, solid: LatticeCell, target: KnotDiagram, depth: int, max_states: int
) -> Optional[List[FaceBoundaryMove]]:
    """
    Breadth-first search over moves in the solid's star for a state where
    the exchange becomes legal. Among the shallowest such states the one
    ending closest to ``target`` wins.
    """
    star = _star(solid, d)
    frontier: List[Tuple[KnotDiagram, List[FaceBoundaryMove]]] = [(d, [])]
    seen = {d.cells}
    for _ in range(depth):
        ready = []
        next_frontier = []
        for state, path in frontier:
            for carrier in star:
                removed = state.cells & boundary_cells(carrier)
                if not removed:
                    continue
                mv = face_move(carrier, removed)
                if not mv.inserted:
                    continue
                verdict, nxt = checked_exchange(state, mv)
                if not verdict:
                    continue
                if nxt.cells in seen:
                    continue
                seen.add(nxt.cells)
                distance = _distance_after_exchange(nxt, solid, target)
                if distance is not None:
                    ready.append((distance, len(ready), path + [mv]))
                elif len(seen) < max_states:
                    next_frontier.append((nxt, path + [mv]))
        if ready:
            return min(ready)[2]
        if not next_frontier:
            return None
        frontier = next_frontier
    return None


def sweep(
    d: KnotDiagram,
    solids: Sequence[LatticeCell],
    target: KnotDiagram,
    local_depth: int = SWEEP_LOCAL_DEPTH,
    local_states: int = SWEEP_LOCAL_STATES,
) -> MoveSequence:
    """
    Walk the chain of solids, exchanging at each one the knot cells on its
    boundary for the complementary cells, until the diagram equals ``target``.
    """
    current = d
    steps: List[Step] = []
    seen: Set[LatticeCell] = set()
    for index, solid in enumerate(solids):
        if seen and not any(_shared_facet(solid, s) for s in seen):
            logger.warning("solid %d [%s] shares no face with the earlier chain", index, format_cell(solid))
        seen.add(solid)
        boundary = boundary_cells(solid)
        removed = current.cells & boundary
        if not removed or removed == target.cells & boundary:
            continue
        mv = face_move(solid, removed)
        verdict = is_legal(current, mv)
        if not verdict:
            detour = _unlock(current, solid, target, local_depth, local_states) if local_depth > 0 else None
            if detour is None:
                raise Stuck(index, f"{verdict.reason}; no unlock within {local_depth} auxiliary moves, try subdividing")
            logger.debug("solid %d unlocked by %d auxiliary move(s)", index, len(detour))
            for aux in detour:
                current = apply_move(current, aux)
                steps.append(aux)
            removed = current.cells & boundary
            if not removed or removed == target.cells & boundary:
                continue
            mv = face_move(solid, removed)
        current = apply_move(current, mv)
        steps.append(mv)

    if current.cells != target.cells:
        diff = len(current.cells ^ target.cells)
        raise Stuck(len(solids), f"chain exhausted with {diff} cell(s) still differing from the target")
    logger.info("sweep over %d solids produced %d move(s)", len(solids), len(steps))
    return MoveSequence(d, tuple(steps), current.digest())


def subdivide_move(d: KnotDiagram, mv: FaceBoundaryMove, m: int) -> List[FaceBoundaryMove]:
    """The image of an M2 move after M1: a sweep through the refined carrier from A's side to B's side."""
    fine = subdivide_knot(d, m)
    target = subdivide_knot(apply_move(d, mv), m)
    pieces = subdivide_cell(mv.carrier, m)
    fine_removed: Set[LatticeCell] = set()
    for cell in mv.removed:
        fine_removed |= subdivide_cell(cell, m)
    seeds = [p for p in pieces if boundary_cells(p) & fine_removed]
    return list(sweep(fine, chain_order(pieces, seeds), target).face_moves)
