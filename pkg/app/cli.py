"""
Command-line surface.

Exit codes: 0 success or valid, 1 invalid input or failed validation,
2 inconclusive search, 3 usage error. Logs go to stderr; stdout carries
only the command's result (text, or JSON with ``--json``).
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from app.config import (
    SEARCH_MAX_MOVES,
    SEARCH_MAX_STATES,
    SEARCH_SCALES,
    SWEEP_AXIS,
    SWEEP_LOCAL_DEPTH,
    SWEEP_LOCAL_STATES,
    SWEEP_ORDER,
)
from app.fixture_utils import BUILTIN_KNOTS, load_fixture, product_cylinder, shift_cylinder
from app.io_utils import (
    ParseError,
    certificate_to_dict,
    export_csv,
    export_obj,
    format_step,
    parse_cell_file,
    parse_certificate,
    serialize_cell_file,
    serialize_certificate,
    step_to_dict,
)
from app.knot_utils import (
    CellComplex,
    KnotDiagram,
    component_count,
    euler_characteristic,
    face_counts,
    is_orientable,
    is_tubular,
    validate_knot,
)
from app.lattice_utils import LatticeError, format_cell
from app.move_utils import IllegalMove, MoveSequence, Stuck, apply_move, enumerate_face_moves, subdivide_knot
from app.search_utils import bfs_search, replay, search_with_subdivision
from app.slice_utils import (
    InvalidSlice,
    SlicedComplex,
    StructureError,
    carry_full,
    carry_level,
    slice_at,
    validate_sliced,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    """Arguments parsed but do not make sense for the given input."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info("wrote %s", args.output)
    else:
        sys.stdout.write(text)


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _complex_dict(c: CellComplex) -> dict:
    return {
        "k": c.dim,
        "n": c.ctx.ambient_dim,
        "scale": c.ctx.scale,
        "cells": [format_cell(cell) for cell in c.sorted_cells()],
        "digest": c.digest(),
    }


def _emit_complex(args, c: CellComplex) -> None:
    if args.json:
        _emit_json(_complex_dict(c))
    else:
        _write(args, serialize_cell_file(c))


def _emit_certificate(args, seq: MoveSequence, extra: Optional[dict] = None) -> None:
    if args.json:
        payload = certificate_to_dict(seq)
        payload.update(extra or {})
        _emit_json(payload)
    else:
        _write(args, serialize_certificate(seq))


def _load_knot(path: str) -> KnotDiagram:
    return KnotDiagram(parse_cell_file(_read(path)))


def _load_sliced(path: str) -> SlicedComplex:
    return SlicedComplex.from_complex(parse_cell_file(_read(path)))


def cmd_validate(args) -> int:
    c = parse_cell_file(_read(args.file))
    if (c.dim, c.ctx.ambient_dim) == (3, 5):
        try:
            report = validate_sliced(SlicedComplex.from_complex(c))
        except StructureError as exc:
            return _report_failure(args, str(exc))
    else:
        report = validate_knot(KnotDiagram(c))
    if args.json:
        _emit_json(report.to_dict())
    elif report.valid:
        print("valid")
    else:
        print("invalid")
        for failure in report.failures:
            print(f"  {failure}")
    return EXIT_OK if report.valid else EXIT_INVALID


def _report_failure(args, message: str) -> int:
    if args.json:
        _emit_json({"valid": False, "failures": [message]})
    else:
        print("invalid")
        print(f"  {message}")
    return EXIT_INVALID


def _face_label(d: int) -> str:
    return "VEFC"[d] if d < 4 else f"f{d}"


def cmd_info(args) -> int:
    c = parse_cell_file(_read(args.file))
    info = {
        "k": c.dim,
        "n": c.ctx.ambient_dim,
        "scale": c.ctx.scale,
        "cell_count": len(c),
        "face_counts": list(face_counts(c)),
        "euler": euler_characteristic(c),
        "components": component_count(c),
        "orientable": is_orientable(c),
        "digest": c.digest(),
    }
    if (c.dim, c.ctx.ambient_dim) in {(2, 4), (1, 3)}:
        tubular, offending = is_tubular(KnotDiagram(c))
        info["tubular"] = tubular
        info["non_tubular_cells"] = [format_cell(q) for q in offending]
    if args.json:
        _emit_json(info)
        return EXIT_OK
    counts = ", ".join(f"{_face_label(d)}={n}" for d, n in enumerate(info["face_counts"]))
    print(f"k={c.dim} n={c.ctx.ambient_dim} scale={c.ctx.scale} cells={len(c)}")
    print(f"{counts}  χ={info['euler']}")
    print(f"components={info['components']} orientable={info['orientable']}")
    if "tubular" in info:
        print(f"tubular={info['tubular']} ({len(info['non_tubular_cells'])} offending cells)")
    print(f"digest={info['digest']}")
    return EXIT_OK


def cmd_moves(args) -> int:
    d = _load_knot(args.file)
    moves = enumerate_face_moves(d)
    if args.json:
        _emit_json({"moves": [dict(step_to_dict(mv), index=i) for i, mv in enumerate(moves)]})
    else:
        for index, mv in enumerate(moves):
            print(f"{index}: {format_step(mv)}")
    return EXIT_OK


def cmd_apply(args) -> int:
    d = _load_knot(args.file)
    moves = enumerate_face_moves(d)
    if not 0 <= args.move < len(moves):
        raise UsageError(f"move index {args.move} outside 0..{len(moves) - 1}")
    _emit_complex(args, apply_move(d, moves[args.move]).complex)
    return EXIT_OK


def cmd_subdivide(args) -> int:
    d = _load_knot(args.file)
    _emit_complex(args, subdivide_knot(d, args.m).complex)
    return EXIT_OK


def cmd_slice(args) -> int:
    J = _load_sliced(args.file)
    _emit_complex(args, slice_at(J, args.level).complex)
    return EXIT_OK


def _sweep_options(args) -> dict:
    return {"axis": args.axis, "order": args.order, "local_depth": args.local_depth,
            "local_states": args.local_states}


def cmd_sweep(args) -> int:
    J = _load_sliced(args.file)
    _emit_certificate(args, carry_level(J, args.level, **_sweep_options(args)))
    return EXIT_OK


def cmd_carry(args) -> int:
    J = _load_sliced(args.file)
    _emit_certificate(args, carry_full(J, **_sweep_options(args)))
    return EXIT_OK


def cmd_search(args) -> int:
    source, target = _load_knot(args.source), _load_knot(args.target)
    if args.subdivide:
        result = search_with_subdivision(
            source, target, SEARCH_SCALES, args.max_moves, args.max_states, args.normalize
        )
    else:
        result = bfs_search(source, target, args.max_moves, args.max_states, args.normalize)
    if not result.found:
        if args.json:
            _emit_json(result.to_dict())
        else:
            print(f"NotFound: {result.reason} ({result.explored} states, depth {result.depth})")
        return EXIT_INCONCLUSIVE
    _emit_certificate(args, result.certificate, {"search": result.to_dict()})
    if result.translation and any(result.translation):
        logger.warning("endpoint matches the target up to translation by %s", list(result.translation))
    return EXIT_OK


def cmd_replay(args) -> int:
    seq = parse_certificate(_read(args.file))
    result = replay(seq)
    if args.json:
        _emit_json(dict(result.to_dict(), step_count=len(seq)))
    elif result.ok:
        print(f"ok: {len(seq)} step(s), digest {result.final_digest}")
    else:
        print(f"rejected at step {result.failed_step}: {result.reason}")
    return EXIT_OK if result.ok else EXIT_INVALID


def cmd_gen(args) -> int:
    fixture = load_fixture(args.kind)
    if fixture is not None:
        _emit_complex(args, fixture)
        return EXIT_OK
    if args.kind in BUILTIN_KNOTS:
        c = BUILTIN_KNOTS[args.kind](args.scale).complex
    elif args.kind == "product-cylinder":
        c = product_cylinder(BUILTIN_KNOTS["sphere"](args.scale), args.levels)
    else:
        c = shift_cylinder(BUILTIN_KNOTS["sphere"](args.scale), args.shift_axis, args.offset)
    _emit_complex(args, c)
    return EXIT_OK


def cmd_export(args) -> int:
    c = parse_cell_file(_read(args.file))
    _write(args, export_csv(c) if args.format == "csv" else export_obj(c))
    return EXIT_OK


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for detail")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = CliParser(prog="cubeknot", description="Cubical 2-knots, cubulated moves and isotopy cylinders.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text, output=False):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.set_defaults(handler=handler)
        if output:
            p.add_argument("-o", "--output", help="write to this file instead of stdout")
        return p

    def sweep_flags(p):
        p.add_argument("--axis", type=int, default=SWEEP_AXIS, help="coordinate ordering the solids")
        p.add_argument("--order", choices=("levels", "parallel"), default=SWEEP_ORDER)
        p.add_argument("--local-depth", type=int, default=SWEEP_LOCAL_DEPTH)
        p.add_argument("--local-states", type=int, default=SWEEP_LOCAL_STATES)

    command("validate", cmd_validate, "check a knot or a sliced cylinder").add_argument("file")
    command("info", cmd_info, "counts, Euler characteristic, flags").add_argument("file")
    command("moves", cmd_moves, "list legal face boundary moves").add_argument("file")

    p = command("apply", cmd_apply, "apply one listed move", output=True)
    p.add_argument("file")
    p.add_argument("--move", type=int, required=True, help="index from `moves`")

    p = command("subdivide", cmd_subdivide, "apply the subdivision move", output=True)
    p.add_argument("file")
    p.add_argument("-m", type=int, required=True, help="subdivision factor (>= 2)")

    p = command("slice", cmd_slice, "level set of a cylinder", output=True)
    p.add_argument("file")
    p.add_argument("--level", type=float, required=True, help="non-integer level, e.g. 0.5")

    p = command("sweep", cmd_sweep, "certificate across one integer level", output=True)
    p.add_argument("file")
    p.add_argument("--level", type=int, required=True)
    sweep_flags(p)

    p = command("carry", cmd_carry, "certificate from the bottom slice to the top slice", output=True)
    p.add_argument("file")
    sweep_flags(p)

    p = command("search", cmd_search, "breadth-first search for a certificate", output=True)
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--max-moves", type=int, default=SEARCH_MAX_MOVES)
    p.add_argument("--max-states", type=int, default=SEARCH_MAX_STATES)
    p.add_argument("--normalize", action="store_true", help="match the target up to translation")
    p.add_argument("--subdivide", action="store_true", help=f"retry at scales {list(SEARCH_SCALES)}")

    command("replay", cmd_replay, "verify a certificate").add_argument("file")

    p = command("gen", cmd_gen, "built-in fixtures", output=True)
    p.add_argument("kind", choices=sorted(BUILTIN_KNOTS) + ["product-cylinder", "shift-cylinder"])
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--levels", type=int, default=3, help="product cylinder height")
    p.add_argument("--axis", dest="shift_axis", type=int, default=4, help="shift cylinder direction")
    p.add_argument("--offset", type=int, default=1, help="shift cylinder distance")

    p = command("export", cmd_export, "vertex projection for external viewers", output=True)
    p.add_argument("file")
    p.add_argument("--format", choices=("csv", "obj"), default="csv")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cubeknot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cubeknot: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ParseError, InvalidSlice, StructureError, Stuck, IllegalMove, LatticeError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"cubeknot: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
