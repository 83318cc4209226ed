"""Command-line interface: file formats, commands, exit codes."""

import csv
import json
import math
import os

import numpy as np
import pytest

from abflow import ParseError, ShapeError
from abflow.cli import main, matrix_to_json, parse_matrix_file, write_matrix_json
from abflow.linalg import EPS


def write(path, text):
    path.write_text(text)
    return str(path)


# ----------------------------- parsing -----------------------------

def test_parse_txt_diagonal(tmp_path):
    M = parse_matrix_file(write(tmp_path / "m.txt", "2 0\n0 3\n"))
    assert np.array_equal(M, np.array([[2, 0], [0, 3]], dtype=complex))


def test_parse_json_scalar(tmp_path):
    M = parse_matrix_file(write(
        tmp_path / "m.json", '{"rows":1,"cols":1,"data":[[4,0]]}'))
    assert np.array_equal(M, np.array([[4.0]], dtype=complex))


def test_parse_txt_ragged_rows(tmp_path):
    with pytest.raises(ShapeError):
        parse_matrix_file(write(tmp_path / "m.txt", "1 2\n3\n"))


def test_parse_txt_bad_token_reports_position(tmp_path):
    with pytest.raises(ParseError) as info:
        parse_matrix_file(write(tmp_path / "m.txt", "1 2\n3 x\n"))
    assert info.value.line == 2
    assert info.value.offset == 1


def test_parse_txt_empty_file(tmp_path):
    with pytest.raises(ParseError):
        parse_matrix_file(write(tmp_path / "m.txt", "\n\n"))


def test_parse_json_bad_documents(tmp_path):
    with pytest.raises(ParseError):
        parse_matrix_file(write(tmp_path / "m.json", "[1, 2"))
    with pytest.raises(ParseError):
        parse_matrix_file(write(tmp_path / "m.json", '{"rows":1,"cols":1}'))
    with pytest.raises(ShapeError):
        parse_matrix_file(write(
            tmp_path / "m.json", '{"rows":2,"cols":1,"data":[[1,0]]}'))
    with pytest.raises(ParseError):
        parse_matrix_file(write(
            tmp_path / "m.json", '{"rows":1,"cols":1,"data":[[1]]}'))


def test_parse_missing_file(tmp_path):
    with pytest.raises(ParseError):
        parse_matrix_file(str(tmp_path / "absent.txt"))


def test_json_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    M = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    M[0, 0] = 1 / 3 + 1j * math.pi  # non-terminating binary fractions
    path = tmp_path / "m.json"
    write_matrix_json(M, path)
    back = parse_matrix_file(str(path))
    assert np.array_equal(back, M.astype(np.complex128))
    # a second hop stays identical
    write_matrix_json(back, path)
    assert np.array_equal(parse_matrix_file(str(path)), back)


def test_matrix_to_json_shape_fields():
    doc = json.loads(matrix_to_json(np.eye(2, dtype=complex)))
    assert doc["rows"] == 2 and doc["cols"] == 2
    assert doc["data"] == [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]


# ----------------------------- sqrt command -----------------------------

def test_cli_sqrt_diagonal(tmp_path):
    s = write(tmp_path / "diag49.txt", "4 0\n0 9\n")
    out = str(tmp_path / "X.json")
    trace = str(tmp_path / "trace.csv")
    code = main(["sqrt", "--input", s, "--order", "2",
                 "--out", out, "--trace", trace])
    assert code == 0
    X = parse_matrix_file(out)
    assert np.allclose(X, np.diag([2.0, 3.0]), atol=1e-12)
    with open(trace, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and rows[-1]["residual"]


def test_cli_sqrt_breakdown_exit_code(tmp_path):
    s = write(tmp_path / "neg.txt", "-1\n")
    code = main(["sqrt", "--input", s, "--out", str(tmp_path / "X.json")])
    assert code == 2


def test_cli_sqrt_max_iterations_exit_code(tmp_path):
    s = write(tmp_path / "s.txt", "2 0\n0 3\n")
    code = main(["sqrt", "--input", s, "--kmax", "2", "--tol", "1e-15",
                 "--out", str(tmp_path / "X.json")])
    assert code == 3


# ----------------------------- pencil command -----------------------------

def test_cli_pencil_diagonal(tmp_path):
    a = write(tmp_path / "a.txt", "0.5 0\n0 2\n")
    b = write(tmp_path / "b.txt", "1 0\n0 1\n")
    out = str(tmp_path / "U.json")
    code = main(["pencil", "--a", a, "--b", b, "--out", out])
    assert code == 0
    doc = json.loads(open(out).read())
    assert doc["status"] == "converged"
    assert doc["U"]["cols"] == 1
    assert doc["Lambda"]["data"][0][0] == pytest.approx(0.5, abs=1e-10)
    assert doc["residual"] <= 1e-10


def test_cli_pencil_breakdown(tmp_path):
    a = write(tmp_path / "neg1.txt", "-1 0\n0 0.5\n")
    b = write(tmp_path / "id.txt", "1 0\n0 1\n")
    code = main(["pencil", "--a", a, "--b", b,
                 "--out", str(tmp_path / "U.json")])
    assert code == 2
    doc = json.loads(open(tmp_path / "U.json").read())
    assert doc["status"] == "breakdown"
    assert doc["residual"] is None


def test_cli_pencil_accelerated(tmp_path):
    a = write(tmp_path / "a.txt", "0.5 0\n0 2\n")
    b = write(tmp_path / "b.txt", "1 0\n0 1\n")
    out = str(tmp_path / "U.json")
    code = main(["pencil", "--a", a, "--b", b, "--order", "2",
                 "--dim", "1", "--out", out])
    assert code == 0
    doc = json.loads(open(out).read())
    assert doc["Lambda"]["data"][0][0] == pytest.approx(0.5, abs=1e-10)


# ----------------------------- bench command -----------------------------

def test_cli_bench_emits_traces_with_settled_order(tmp_path):
    out_dir = str(tmp_path / "D")
    code = main(["bench", "--kind", "sqrt", "--spectrum", "2,3",
                 "--orders", "2", "--seed", "7", "--out-dir", out_dir])
    assert code == 0
    with open(os.path.join(out_dir, "bench_sqrt_r2.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    settled = [float(r["order_estimate"]) for r in rows
               if r["order_estimate"] and float(r["error"]) > 1e2 * EPS]
    assert settled and 1.8 <= settled[-1] <= 2.2
    doc = json.loads(open(os.path.join(out_dir, "bench_sqrt_r2.json")).read())
    assert doc["header"]["order"] == 2
    assert doc["header"]["seed"] == 7


def test_cli_bench_multiple_orders(tmp_path):
    out_dir = str(tmp_path / "D")
    code = main(["bench", "--kind", "sqrt", "--spectrum", "2,3",
                 "--orders", "1,2,3", "--seed", "3", "--out-dir", out_dir])
    assert code == 0
    for r in (1, 2, 3):
        assert os.path.exists(os.path.join(out_dir, f"bench_sqrt_r{r}.csv"))


def test_cli_bench_pencil_kind(tmp_path):
    out_dir = str(tmp_path / "D")
    code = main(["bench", "--kind", "pencil", "--spectrum", "0.5,2",
                 "--orders", "2", "--seed", "0", "--kmax", "30",
                 "--out-dir", out_dir])
    assert code == 0
    assert os.path.exists(os.path.join(out_dir, "bench_pencil_r2.csv"))


# ----------------------------- error handling -----------------------------

def test_cli_usage_error_exits_one(capsys):
    assert main([]) == 1
    assert main(["sqrt"]) == 1
    assert main(["bench", "--kind", "sqrt", "--spectrum", "abc",
                 "--orders", "2"]) == 1
    capsys.readouterr()


def test_cli_parse_error_exits_one(tmp_path, capsys):
    bad = write(tmp_path / "bad.txt", "1 2\n3\n")
    assert main(["sqrt", "--input", bad]) == 1
    err = capsys.readouterr().err
    assert "error" in err


def test_cli_out_dir_env_rebases_default_names(tmp_path, monkeypatch):
    s = write(tmp_path / "s.txt", "4\n")
    monkeypatch.setenv("ABFLOW_OUT_DIR", str(tmp_path))
    code = main(["sqrt", "--input", s])
    assert code == 0
    assert (tmp_path / "sqrt_result.json").exists()


def test_cli_atomic_write_leaves_no_temp(tmp_path):
    s = write(tmp_path / "s.txt", "4 0\n0 9\n")
    out = str(tmp_path / "X.json")
    assert main(["sqrt", "--input", s, "--out", out]) == 0
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]
    assert leftovers == []
