"""
Plain-text cell files and certificate files.

Cell file::

    cubeknot <k> <n> <scale>
    cell x1 .. xn : a1 .. ak

Certificate file::

    cubeknot-cert
    cubeknot <k> <n> <scale>
    cell ...
    m1 <m>
    m2 <carrier> | removed: <cell>; <cell> | inserted: <cell>; <cell>
    digest sha256 <hex>

Lines starting with '#' and blank lines are ignored. Cells are written in
sorted order so that serialization is canonical.
"""

import logging
from typing import Iterable, Iterator, List, Optional, Tuple

from app.config import CELL_FILE_MAGIC, CERT_FILE_MAGIC, DIGEST_ALGORITHM
from app.knot_utils import CellComplex, KnotDiagram
from app.lattice_utils import LatticeCell, LatticeContext, LatticeError, format_cell
from app.move_utils import IllegalMove, MoveSequence, Step, Subdivision, face_move

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


def _content_lines(text: str) -> Iterator[Tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield number, line


def parse_cell(text: str, line: int = 0, ambient: Optional[int] = None) -> LatticeCell:
    """Parse ``x1 .. xn : a1 .. ak``; axes must be strictly ascending."""
    if ":" not in text:
        raise ParseError(line, f"expected 'coordinates : axes', got {text!r}")
    coords_text, axes_text = text.split(":", 1)
    try:
        anchor = tuple(int(x) for x in coords_text.split())
        axes = tuple(int(a) for a in axes_text.split())
    except ValueError:
        raise ParseError(line, f"non-integer entry in {text!r}") from None
    if ambient is not None and len(anchor) != ambient:
        raise ParseError(line, f"cell has {len(anchor)} coordinates, header says {ambient}")
    try:
        return LatticeCell(anchor, axes)
    except LatticeError as exc:
        raise ParseError(line, str(exc)) from None


def _parse_header(line: int, text: str) -> Tuple[LatticeContext, int]:
    parts = text.split()
    if len(parts) != 4 or parts[0] != CELL_FILE_MAGIC:
        raise ParseError(line, f"expected '{CELL_FILE_MAGIC} <k> <n> <scale>', got {text!r}")
    try:
        k, n, scale = (int(p) for p in parts[1:])
        ctx = LatticeContext(n, scale)
    except (ValueError, LatticeError) as exc:
        raise ParseError(line, f"bad header: {exc}") from None
    if not 0 <= k <= n:
        raise ParseError(line, f"cell dimension {k} outside 0..{n}")
    return ctx, k


def _parse_body(lines: Iterable[Tuple[int, str]], ctx: LatticeContext, k: int, stop=None):
    cells = set()
    rest = []
    for number, line in lines:
        if stop is not None and stop(line):
            rest.append((number, line))
            continue
        if rest:
            raise ParseError(number, "cell lines must precede the steps")
        if not line.startswith("cell "):
            raise ParseError(number, f"expected a 'cell' line, got {line!r}")
        cell = parse_cell(line[len("cell "):], number, ctx.ambient_dim)
        if cell.dim != k:
            raise ParseError(number, f"cell has dimension {cell.dim}, header says {k}")
        if cell in cells:
            raise ParseError(number, f"duplicate cell {format_cell(cell)}")
        cells.add(cell)
    return CellComplex(ctx, k, frozenset(cells)), rest


def parse_cell_file(text: str) -> CellComplex:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty cell file")
    ctx, k = _parse_header(*lines[0])
    complex_, _ = _parse_body(lines[1:], ctx, k)
    logger.debug("parsed %d cells of dimension %d in Z^%d", len(complex_), k, ctx.ambient_dim)
    return complex_


def serialize_cell_file(c: CellComplex) -> str:
    return c.canonical_text()


def _parse_cell_list(text: str, line: int, ambient: int) -> List[LatticeCell]:
    return [parse_cell(part, line, ambient) for part in text.split(";") if part.strip()]


def _parse_step(number: int, line: str, ambient: int) -> Step:
    keyword, _, rest = line.partition(" ")
    if keyword == "m1":
        try:
            return Subdivision(int(rest))
        except (ValueError, LatticeError) as exc:
            raise ParseError(number, f"bad subdivision step: {exc}") from None
    if keyword != "m2":
        raise ParseError(number, f"unknown step {keyword!r}")
    parts = [p.strip() for p in rest.split("|")]
    if len(parts) != 3 or not parts[1].startswith("removed:") or not parts[2].startswith("inserted:"):
        raise ParseError(number, "expected 'm2 <carrier> | removed: ... | inserted: ...'")
    carrier = parse_cell(parts[0], number, ambient)
    removed = _parse_cell_list(parts[1][len("removed:"):], number, ambient)
    inserted = _parse_cell_list(parts[2][len("inserted:"):], number, ambient)
    try:
        mv = face_move(carrier, removed)
    except (IllegalMove, LatticeError) as exc:
        raise ParseError(number, str(exc)) from None
    if mv.inserted != frozenset(inserted):
        raise ParseError(number, "inserted cells are not the complement of the removed cells")
    return mv


def parse_certificate(text: str) -> MoveSequence:
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != CERT_FILE_MAGIC:
        raise ParseError(lines[0][0] if lines else 1, f"expected '{CERT_FILE_MAGIC}' header")
    if len(lines) < 2:
        raise ParseError(lines[0][0], "missing initial diagram header")
    ctx, k = _parse_header(*lines[1])
    complex_, rest = _parse_body(lines[2:], ctx, k, stop=lambda line: not line.startswith("cell "))
    if not rest or not rest[-1][1].startswith("digest "):
        raise ParseError(rest[-1][0] if rest else lines[-1][0], "missing 'digest' trailer")

    number, trailer = rest[-1]
    parts = trailer.split()
    if len(parts) == 3 and parts[1] == DIGEST_ALGORITHM:
        final_digest = parts[2]
    elif len(parts) == 2:
        final_digest = parts[1]
    else:
        raise ParseError(number, f"expected 'digest {DIGEST_ALGORITHM} <hex>', got {trailer!r}")

    steps = [_parse_step(n, line, ctx.ambient_dim) for n, line in rest[:-1]]
    return MoveSequence(KnotDiagram(complex_), tuple(steps), final_digest)


def _format_cells(cells: Iterable[LatticeCell]) -> str:
    return "; ".join(format_cell(c) for c in sorted(cells))


def format_step(step: Step) -> str:
    if isinstance(step, Subdivision):
        return f"m1 {step.m}"
    return (
        f"m2 {format_cell(step.carrier)} | removed: {_format_cells(step.removed)}"
        f" | inserted: {_format_cells(step.inserted)}"
    )


def serialize_certificate(seq: MoveSequence) -> str:
    lines = [CERT_FILE_MAGIC, seq.initial.complex.canonical_text().rstrip("\n")]
    lines.extend(format_step(step) for step in seq.steps)
    lines.append(f"digest {DIGEST_ALGORITHM} {seq.final_digest}")
    return "\n".join(lines) + "\n"


def step_to_dict(step: Step) -> dict:
    if isinstance(step, Subdivision):
        return {"kind": "m1", "m": step.m}
    return {
        "kind": "m2",
        "carrier": format_cell(step.carrier),
        "removed": [format_cell(c) for c in sorted(step.removed)],
        "inserted": [format_cell(c) for c in sorted(step.inserted)],
    }


def certificate_to_dict(seq: MoveSequence) -> dict:
    return {
        "initial_digest": seq.initial.digest(),
        "digest": seq.final_digest,
        "steps": [step_to_dict(s) for s in seq.steps],
    }


def export_csv(c: CellComplex) -> str:
    """One row per cell vertex: cell index, then the first three coordinates."""
    rows = ["cell,x,y,z"]
    for index, cell in enumerate(c.sorted_cells()):
        for corner in _corners(cell):
            rows.append(f"{index}," + ",".join(str(x) for x in corner[:3]))
    return "\n".join(rows) + "\n"


def export_obj(c: CellComplex) -> str:
    """Wavefront OBJ of the squares projected onto the first three coordinates."""
    if c.dim != 2:
        raise LatticeError(f"OBJ export needs squares, got dimension {c.dim}")
    index = {}
    faces = []
    for cell in c.sorted_cells():
        corners = _corners(cell)
        # Walk the square's corners in cyclic order.
        loop = [corners[0], corners[1], corners[3], corners[2]]
        ids = []
        for corner in loop:
            point = tuple(corner[:3]) + (0,) * max(0, 3 - len(corner))
            if point not in index:
                index[point] = len(index) + 1
            ids.append(index[point])
        faces.append(ids)
    lines = [f"v {x} {y} {z}" for (x, y, z), _ in sorted(index.items(), key=lambda item: item[1])]
    lines.extend("f " + " ".join(str(i) for i in ids) for ids in faces)
    return "\n".join(lines) + "\n"


def _corners(cell: LatticeCell) -> List[Tuple[int, ...]]:
    corners = []
    for bits in range(2 ** cell.dim):
        point = list(cell.anchor)
        for position, axis in enumerate(cell.axes):
            if bits >> position & 1:
                point[axis - 1] += 1
        corners.append(tuple(point))
    return corners
