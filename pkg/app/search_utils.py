"""
Breadth-first search over the M2-move graph, certificate replay and
seeded random walks.

States are keyed by their full sorted cell list (optionally translated
so the minimal corner sits at the origin), never by a lossy hash.
"""

import hashlib
import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from app.config import DIGEST_ALGORITHM, SEARCH_MAX_MOVES, SEARCH_MAX_STATES, SEARCH_SCALES, WALK_PROPOSALS
from app.knot_utils import KnotDiagram, validate_knot
from app.lattice_utils import (
    LatticeCell,
    LatticeError,
    boundary_cells,
    closure,
    coface_count,
    cofaces,
    format_cell,
    translate,
)
from app.move_utils import (
    FaceBoundaryMove,
    IllegalMove,
    MoveSequence,
    Step,
    Subdivision,
    apply_step,
    checked_exchange,
    empty_sequence,
    face_move,
    invert,
    legal_exchanges,
    malformation,
    subdivide_knot,
    translate_move,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CanonicalKey:
    cells: Tuple[LatticeCell, ...]
    # Offset subtracted during normalization; not part of the identity.
    shift: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def digest(self) -> str:
        text = "\n".join(format_cell(c) for c in self.cells)
        return hashlib.new(DIGEST_ALGORITHM, text.encode()).hexdigest()


@dataclass(frozen=True)
class SearchResult:
    found: bool
    certificate: Optional[MoveSequence]
    explored: int
    depth: int
    translation: Tuple[int, ...] = ()
    scale: int = 1
    reason: str = ""

    def __bool__(self) -> bool:
        return self.found

    def to_dict(self) -> Dict:
        return {
            "found": self.found,
            "step_count": len(self.certificate) if self.certificate else 0,
            "explored": self.explored,
            "depth": self.depth,
            "translation": list(self.translation),
            "scale": self.scale,
            "reason": self.reason,
            "digest": self.certificate.final_digest if self.certificate else None,
        }


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    failed_step: Optional[int] = None
    reason: str = ""
    final_digest: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> Dict:
        return {
            "ok": self.ok,
            "failed_step": self.failed_step,
            "reason": self.reason,
            "digest": self.final_digest,
        }


def canonical_key(d: KnotDiagram, normalize_translation: bool = False) -> CanonicalKey:
    cells = sorted(d.cells)
    if not normalize_translation or not cells:
        return CanonicalKey(tuple(cells), ())
    shift = tuple(min(c.anchor[i] for c in cells) for i in range(d.ctx.ambient_dim))
    back = tuple(-x for x in shift)
    return CanonicalKey(tuple(sorted(translate(c, back) for c in cells)), shift)


def _check_pair(source: KnotDiagram, target: KnotDiagram) -> None:
    if source.ctx != target.ctx or source.dim != target.dim:
        raise LatticeError(
            f"diagrams differ in ambient or scale: {source.ctx} vs {target.ctx}; subdivide first"
        )
    for name, d in (("source", source), ("target", target)):
        if not d.valid:
            raise LatticeError(f"{name} is not a valid knot: " + "; ".join(d.report.failures))


Parents = Dict[CanonicalKey, Tuple[Optional[CanonicalKey], Optional[FaceBoundaryMove], Tuple[int, ...]]]


def _trace(parents: Parents, key: CanonicalKey) -> List[FaceBoundaryMove]:
    """Moves leading from the root of one search side to ``key``."""
    path = []
    while True:
        parent, mv, _ = parents[key]
        if parent is None:
            return path[::-1]
        path.append(mv)
        key = parent


def bfs_search(
    source: KnotDiagram,
    target: KnotDiagram,
    max_moves: int = SEARCH_MAX_MOVES,
    max_states: int = SEARCH_MAX_STATES,
    normalize_translation: bool = False,
) -> SearchResult:
    """
    Shortest M2-only certificate from ``source`` to ``target`` within the bounds.

    Both ends are grown one full layer at a time, the smaller frontier first.
    Every move is undone by its inverse, so the path found from the target
    side is inverted on the way back. ``max_moves`` bounds the certificate
    length and ``max_states`` the states seen on both sides together.

    A result with ``found=False`` only says the bounds were exhausted.
    """
    _check_pair(source, target)
    start_key = canonical_key(source, normalize_translation)
    goal = canonical_key(target, normalize_translation)
    forward: Parents = {start_key: (None, None, start_key.shift)}
    backward: Parents = {goal: (None, None, goal.shift)}

    def finish(meet: CanonicalKey, explored: int) -> SearchResult:
        delta = tuple(f - b for f, b in zip(forward[meet][2], backward[meet][2]))
        path = _trace(forward, meet)
        for mv in reversed(_trace(backward, meet)):
            path.append(translate_move(invert(mv), delta) if any(delta) else invert(mv))
        end = target
        if any(delta):
            end = KnotDiagram(target.complex.with_cells(translate(c, delta) for c in target.cells))
        certificate = MoveSequence(source, tuple(path), end.digest())
        logger.info("certificate of length %d found after %d states", len(path), explored)
        return SearchResult(True, certificate, explored, len(path), tuple(-x for x in delta))

    if start_key == goal:
        return finish(start_key, 1)

    frontiers = {True: [(source, start_key)], False: [(target, goal)]}
    depths = {True: 0, False: 0}
    reason = "move graph exhausted"
    while frontiers[True] and frontiers[False]:
        if depths[True] + depths[False] >= max_moves:
            reason = f"no certificate within {max_moves} moves"
            break
        grow_forward = len(frontiers[True]) <= len(frontiers[False])
        mine, other = (forward, backward) if grow_forward else (backward, forward)
        layer: List[Tuple[KnotDiagram, CanonicalKey]] = []
        meetings: List[CanonicalKey] = []
        exhausted = False
        for state, key in frontiers[grow_forward]:
            for mv, nxt in legal_exchanges(state):
                nxt_key = canonical_key(nxt, normalize_translation)
                if nxt_key in mine:
                    continue
                mine[nxt_key] = (key, mv, nxt_key.shift)
                if nxt_key in other:
                    meetings.append(nxt_key)
                if len(forward) + len(backward) >= max_states:
                    exhausted = True
                    break
                layer.append((nxt, nxt_key))
            if exhausted:
                break
        frontiers[grow_forward] = layer
        depths[grow_forward] += 1
        if meetings:
            best = min(meetings, key=lambda k: len(_trace(other, k)))
            return finish(best, len(forward) + len(backward))
        if exhausted:
            depth = depths[True] + depths[False]
            logger.info("state budget of %d exhausted at combined depth %d", max_states, depth)
            return SearchResult(False, None, len(forward) + len(backward), depth, reason=f"state budget {max_states} exhausted")

    explored = len(forward) + len(backward)
    logger.info("search inconclusive: %s (%d states)", reason, explored)
    return SearchResult(False, None, explored, depths[True] + depths[False], reason=reason)


def search_with_subdivision(
    source: KnotDiagram,
    target: KnotDiagram,
    scales: Sequence[int] = SEARCH_SCALES,
    max_moves: int = SEARCH_MAX_MOVES,
    max_states: int = SEARCH_MAX_STATES,
    normalize_translation: bool = False,
) -> SearchResult:
    """Retry the search after subdividing both diagrams by each factor in turn."""
    explored = 0
    last: Optional[SearchResult] = None
    for m in scales:
        if m == 1:
            fine_source, fine_target, prefix = source, target, ()
        else:
            fine_source, fine_target, prefix = subdivide_knot(source, m), subdivide_knot(target, m), (Subdivision(m),)
        logger.info("searching at subdivision factor %d", m)
        last = bfs_search(fine_source, fine_target, max_moves, max_states, normalize_translation)
        explored += last.explored
        if last.found:
            steps = prefix + last.certificate.steps
            certificate = MoveSequence(source, steps, last.certificate.final_digest)
            return SearchResult(True, certificate, explored, last.depth, last.translation, m)
    reason = last.reason if last else "no scales given"
    return SearchResult(False, None, explored, last.depth if last else 0, reason=reason)


def replay(seq: MoveSequence) -> ReplayResult:
    """Re-apply every step with legality re-checked and compare the endpoint digest."""
    current = seq.initial
    if not current.valid:
        return ReplayResult(False, None, "initial diagram is not a valid knot: " + "; ".join(current.report.failures))
    for index, step in enumerate(seq.steps):
        try:
            current = apply_step(current, step)
        except (IllegalMove, LatticeError) as exc:
            logger.info("replay rejected step %d: %s", index, exc)
            return ReplayResult(False, index, str(exc))
        if not current.valid:
            return ReplayResult(False, index, "intermediate diagram is not a valid knot")
    digest = current.digest()
    if digest != seq.final_digest:
        return ReplayResult(False, len(seq.steps), "final digest does not match", digest)
    return ReplayResult(True, None, "", digest)


def random_walk(d: KnotDiagram, steps: int, seed: int) -> Tuple[KnotDiagram, MoveSequence]:
    """
    Apply ``steps`` legal moves, each drawn uniformly with a generator seeded by ``seed``.

    A carrier is proposed by drawing a knot cell and one of its cofaces, and
    kept with probability one over the number of knot cells on its boundary;
    every legal move is then equally likely. Full enumeration only happens
    when ``WALK_PROPOSALS`` rounds of proposals all fail.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    rng = random.Random(seed)
    current = d
    path: List[Step] = []
    rounds = WALK_PROPOSALS * coface_count(d.ctx.ambient_dim, d.dim, d.dim + 1)
    for i in range(steps):
        cells = sorted(current.cells)
        picked = None
        for _ in range(rounds * len(cells)):
            carrier = rng.choice(sorted(cofaces(rng.choice(cells), d.dim + 1, d.ctx)))
            removed = boundary_cells(carrier) & current.cells
            if rng.random() * len(removed) >= 1:
                continue
            mv = face_move(carrier, removed)
            if not mv.inserted:
                continue
            verdict, result = checked_exchange(current, mv)
            if verdict:
                picked = (mv, result)
                break
        if picked is None:
            options = legal_exchanges(current)
            if not options:
                raise IllegalMove(f"no legal move available after {i} steps")
            logger.debug("walk step %d fell back to full enumeration", i)
            picked = rng.choice(options)
        mv, current = picked
        path.append(mv)
    if not path:
        return d, empty_sequence(d)
    return current, MoveSequence(d, tuple(path), current.digest())


def _legal_by_definition(d: KnotDiagram, mv: FaceBoundaryMove) -> bool:
    """Legality from the full closure of the knot and a full revalidation of the result."""
    expected = set()
    for cell in mv.removed:
        expected |= closure(cell)
    if closure(mv.carrier) & d.faces != expected:
        return False
    return validate_knot(d.replaced(mv.removed, mv.inserted)).valid


def brute_force_face_moves(d: KnotDiagram) -> List[FaceBoundaryMove]:
    """Every carrier touching the knot and every proper nonempty subset of its boundary, kept if legal."""
    carriers = set()
    for cell in d.cells:
        carriers |= cofaces(cell, d.dim + 1, d.ctx)
    out = []
    for carrier in sorted(carriers):
        boundary = sorted(boundary_cells(carrier))
        for size in range(1, len(boundary)):
            for subset in itertools.combinations(boundary, size):
                removed = frozenset(subset)
                # Removed cells must already be in the knot.
                if not removed <= d.cells:
                    continue
                mv = face_move(carrier, removed)
                if malformation(mv) is None and _legal_by_definition(d, mv):
                    out.append(mv)
    return sorted(out, key=lambda mv: mv.sort_key)
