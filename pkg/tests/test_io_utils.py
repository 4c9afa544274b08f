import pytest

from app.io_utils import (
    ParseError,
    export_csv,
    export_obj,
    parse_cell_file,
    parse_certificate,
    serialize_cell_file,
    serialize_certificate,
)
from app.lattice_utils import LatticeError
from app.move_utils import MoveSequence, Subdivision
from app.search_utils import bfs_search, random_walk, replay
from sample_data import sample_path


def read_sample(name):
    return sample_path(name).read_text(encoding="utf-8")


def test_sample_sphere_parses(sphere_knot):
    c = parse_cell_file(read_sample("sphere.cells"))
    assert len(c) == 6
    assert c.cells == sphere_knot.cells
    assert (c.dim, c.ctx.ambient_dim, c.ctx.scale) == (2, 4, 1)


def test_sample_square_parses(square_knot):
    assert parse_cell_file(read_sample("square.cells")).cells == square_knot.cells


def test_serialization_is_canonical(sphere_knot):
    text = read_sample("sphere.cells")
    expected = "\n".join(line for line in text.splitlines() if not line.startswith("#")) + "\n"
    assert serialize_cell_file(parse_cell_file(text)) == expected
    assert serialize_cell_file(sphere_knot.complex) == expected


def test_unsorted_axes_report_the_line():
    text = "cubeknot 2 4 1\ncell 0 0 0 0 : 1 2\ncell 0 0 0 0 : 2 1\n"
    with pytest.raises(ParseError) as excinfo:
        parse_cell_file(text)
    assert excinfo.value.line == 3
    assert "line 3" in str(excinfo.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("cubeknot 2 4\n", 1),
        ("cubeknot 2 7 1\n", 1),
        ("cubeknot 2 4 1\ncell 0 0 0 0 : 1 2\ncell 0 0 0 0 : 1 2\n", 3),
        ("cubeknot 2 4 1\n# note\ncell 0 0 0 0 : 1\n", 3),
        ("cubeknot 2 4 1\ncell 0 0 0 : 1 2\n", 2),
        ("cubeknot 2 4 1\ncell 0 0 x 0 : 1 2\n", 2),
        ("cubeknot 2 4 1\nsquare 0 0 0 0 : 1 2\n", 2),
        ("cubeknot 2 4 1\ncell 0 0 0 0 1 2\n", 2),
    ],
)
def test_malformed_cell_files(text, line):
    with pytest.raises(ParseError) as excinfo:
        parse_cell_file(text)
    assert excinfo.value.line == line


def test_comments_and_blank_lines_are_ignored():
    text = "# header follows\n\ncubeknot 1 3 1\n\n  # indented comment\ncell 0 0 0 : 1\n"
    assert len(parse_cell_file(text)) == 1


def test_certificate_round_trip_replays(sphere_knot, shift):
    result = bfs_search(sphere_knot, shift(sphere_knot, (1, 0, 0, 0)))
    text = serialize_certificate(result.certificate)
    assert text.startswith("cubeknot-cert\ncubeknot 2 4 1\n")
    assert text.rstrip().endswith(result.certificate.final_digest)
    loaded = parse_certificate(text)
    assert loaded.steps == result.certificate.steps
    assert serialize_certificate(loaded) == text
    assert replay(loaded)


def test_certificate_with_subdivision_step(sphere_knot):
    seq = MoveSequence(sphere_knot, (Subdivision(2),), sphere_knot.digest())
    loaded = parse_certificate(serialize_certificate(seq))
    assert loaded.steps == (Subdivision(2),)
    assert not replay(loaded)


def test_bare_digest_trailer_is_accepted(sphere_knot):
    _, seq = random_walk(sphere_knot, 2, seed=5)
    text = serialize_certificate(seq).replace("digest sha256 ", "digest ")
    assert parse_certificate(text).final_digest == seq.final_digest


def test_certificate_errors(sphere_knot):
    _, seq = random_walk(sphere_knot, 1, seed=2)
    good = serialize_certificate(seq).splitlines()
    with pytest.raises(ParseError):
        parse_certificate("\n".join(good[1:]))
    with pytest.raises(ParseError):
        parse_certificate("\n".join(good[:-1]))
    broken = good[:-2] + ["m3 0 0 0 0 : 1 2 3"] + good[-1:]
    with pytest.raises(ParseError) as excinfo:
        parse_certificate("\n".join(broken))
    assert excinfo.value.line == len(good) - 1
    wrong_complement = good[-2].rsplit("|", 1)[0] + "| inserted: 0 0 0 0 : 1 2"
    with pytest.raises(ParseError, match="complement"):
        parse_certificate("\n".join(good[:-2] + [wrong_complement] + good[-1:]))


def test_exports(sphere_knot):
    obj = export_obj(sphere_knot.complex)
    assert sum(1 for line in obj.splitlines() if line.startswith("v ")) == 8
    assert sum(1 for line in obj.splitlines() if line.startswith("f ")) == 6
    csv = export_csv(sphere_knot.complex).splitlines()
    assert csv[0] == "cell,x,y,z"
    assert len(csv) == 1 + 6 * 4


def test_obj_export_needs_squares(square_knot):
    with pytest.raises(LatticeError):
        export_obj(square_knot.complex)
