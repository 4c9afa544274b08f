import io
import json

import pytest

from app.cli import main
from app.io_utils import parse_cell_file, parse_certificate, serialize_cell_file
from sample_data import sample_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def gen(capsys, tmp_path, kind, *extra):
    path = tmp_path / f"{kind}.cells"
    code, _ = run(capsys, "gen", kind, "-o", str(path), *extra)
    assert code == 0
    return path


def test_gen_sphere_validates(capsys, tmp_path):
    path = gen(capsys, tmp_path, "sphere")
    assert len(parse_cell_file(path.read_text())) == 6
    code, out = run(capsys, "validate", str(path))
    assert code == 0
    assert out.strip() == "valid"


def test_validate_reads_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(sample_path("sphere.cells").read_text()))
    code, _ = run(capsys, "validate", "-")
    assert code == 0


def test_torus_fails_with_euler_characteristic(capsys, tmp_path):
    path = gen(capsys, tmp_path, "torus")
    code, out = run(capsys, "validate", str(path))
    assert code == 1
    assert "χ=0" in out


def test_validate_json(capsys, tmp_path):
    path = gen(capsys, tmp_path, "pinched")
    code, out = run(capsys, "validate", str(path), "--json")
    payload = json.loads(out)
    assert code == 1
    assert payload["valid"] is False
    assert payload["closed"] is False


def test_info(capsys):
    code, out = run(capsys, "info", str(sample_path("sphere.cells")), "--json")
    payload = json.loads(out)
    assert code == 0
    assert payload["face_counts"] == [8, 12, 6]
    assert payload["euler"] == 2
    assert payload["tubular"] is False


def test_cells_key_always_lists_cells(capsys, tmp_path):
    code, out = run(capsys, "gen", "sphere", "--json")
    assert code == 0
    assert isinstance(json.loads(out)["cells"], list)

    code, out = run(capsys, "info", str(sample_path("sphere.cells")), "--json")
    payload = json.loads(out)
    assert "cells" not in payload
    assert payload["cell_count"] == 6

    sphere = str(sample_path("sphere.cells"))
    bigger = tmp_path / "bigger.cells"
    assert run(capsys, "apply", sphere, "--move", "3", "-o", str(bigger))[0] == 0
    code, out = run(capsys, "search", sphere, str(bigger), "--json")
    assert code == 0
    assert json.loads(out)["search"]["step_count"] == 1

    cert = tmp_path / "one.cert"
    assert run(capsys, "search", sphere, str(bigger), "-o", str(cert))[0] == 0
    code, out = run(capsys, "replay", str(cert), "--json")
    payload = json.loads(out)
    assert code == 0
    assert payload["step_count"] == 1
    assert "steps" not in payload


def test_info_on_four_dimensional_cells(capsys, tmp_path):
    path = tmp_path / "tesseract.cells"
    path.write_text("cubeknot 4 4 1\ncell 0 0 0 0 : 1 2 3 4\n")
    code, out = run(capsys, "info", str(path))
    assert code == 0
    assert "V=16, E=32, F=24, C=8, f4=1" in out
    assert "χ=1" in out

    code, out = run(capsys, "info", str(path), "--json")
    assert code == 0
    assert json.loads(out)["face_counts"] == [16, 32, 24, 8, 1]


def test_moves_apply_and_subdivide(capsys, tmp_path):
    sphere = str(sample_path("sphere.cells"))
    code, out = run(capsys, "moves", sphere)
    assert code == 0
    assert len(out.splitlines()) == 18
    assert out.startswith("0: m2 ")

    bigger = tmp_path / "bigger.cells"
    assert run(capsys, "apply", sphere, "--move", "0", "-o", str(bigger))[0] == 0
    assert len(parse_cell_file(bigger.read_text())) == 10

    code, out = run(capsys, "subdivide", sphere, "-m", "2")
    assert code == 0
    assert len(parse_cell_file(out)) == 24


def test_apply_index_out_of_range_is_a_usage_error(capsys):
    code, _ = run(capsys, "apply", str(sample_path("sphere.cells")), "--move", "99")
    assert code == 3


def test_argument_errors_exit_three(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 3
    with pytest.raises(SystemExit) as excinfo:
        main(["subdivide", "x.cells"])
    assert excinfo.value.code == 3


def test_missing_file_exits_one(capsys, tmp_path):
    code, _ = run(capsys, "validate", str(tmp_path / "absent.cells"))
    assert code == 1


def test_parse_error_exits_one(capsys, tmp_path):
    path = tmp_path / "bad.cells"
    path.write_text("cubeknot 2 4 1\ncell 0 0 0 0 : 2 1\n")
    assert main(["validate", str(path)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_product_cylinder_carries_with_empty_certificate(capsys, tmp_path):
    path = gen(capsys, tmp_path, "product-cylinder")
    assert run(capsys, "validate", str(path))[0] == 0
    code, out = run(capsys, "carry", str(path), "--json")
    assert code == 0
    assert json.loads(out)["steps"] == []


def test_shift_cylinder_slice_sweep_and_replay(capsys, tmp_path):
    path = gen(capsys, tmp_path, "shift-cylinder")
    code, out = run(capsys, "slice", str(path), "--level", "1.5")
    assert code == 0
    assert len(parse_cell_file(out)) == 6

    cert = tmp_path / "shift.cert"
    assert run(capsys, "sweep", str(path), "--level", "1", "-o", str(cert))[0] == 0
    assert len(parse_certificate(cert.read_text())) > 0
    code, out = run(capsys, "replay", str(cert))
    assert code == 0
    assert out.startswith("ok:")


def test_slice_at_integer_level_fails(capsys, tmp_path):
    path = gen(capsys, tmp_path, "product-cylinder")
    assert run(capsys, "slice", str(path), "--level", "1")[0] == 1


def test_search_outcomes(capsys, tmp_path, sphere_knot, shift):
    sphere = str(sample_path("sphere.cells"))
    far = tmp_path / "far.cells"
    far.write_text(serialize_cell_file(shift(sphere_knot, (1, 0, 0, 0)).complex))
    assert run(capsys, "validate", str(far))[0] == 0

    code, out = run(capsys, "search", sphere, str(far), "--max-moves", "1")
    assert code == 2
    assert out.startswith("NotFound")

    cert = tmp_path / "found.cert"
    assert run(capsys, "search", sphere, str(far), "-o", str(cert))[0] == 0
    assert run(capsys, "replay", str(cert))[0] == 0

    code, out = run(capsys, "search", sphere, str(far), "--normalize", "--json")
    assert code == 0
    assert json.loads(out)["search"]["translation"] == [1, 0, 0, 0]


def test_replay_rejects_corrupted_certificate(capsys, tmp_path):
    sphere = str(sample_path("sphere.cells"))
    bigger = tmp_path / "bigger.cells"
    run(capsys, "apply", sphere, "--move", "3", "-o", str(bigger))
    cert = tmp_path / "one.cert"
    run(capsys, "search", sphere, str(bigger), "-o", str(cert))
    lines = cert.read_text().splitlines()
    step = next(i for i, line in enumerate(lines) if line.startswith("m2 "))
    carrier, removed, inserted = lines[step].split(" | ")
    lines[step] = " | ".join([carrier, "removed: " + inserted[len("inserted: "):], "inserted: " + removed[len("removed: "):]])
    cert.write_text("\n".join(lines) + "\n")
    code, out = run(capsys, "replay", str(cert), "--json")
    assert code == 1
    assert json.loads(out)["failed_step"] == 0


def test_export(capsys):
    code, out = run(capsys, "export", str(sample_path("sphere.cells")), "--format", "obj")
    assert code == 0
    assert out.count("\nf ") == 6


def test_validate_five_dimensional_without_vertical_cells(capsys, tmp_path):
    path = tmp_path / "flat.cells"
    path.write_text("cubeknot 3 5 1\ncell 0 0 0 0 1 : 1 2 3\n")
    code, out = run(capsys, "validate", str(path))
    assert code == 1
    assert "vertical" in out
