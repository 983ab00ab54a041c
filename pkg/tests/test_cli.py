import json

import pytest
from gmpy2 import mpfr

from quadspec import cli, golden
from quadspec.errors import InternalError
from quadspec.output import emit_csv, format_cell, format_sig
from quadspec.precision import get_precision


def test_format_examples():
    assert format_sig(mpfr(4)) == "4.000000000"
    assert format_sig(mpfr("15.375927184")) == "15.37592718"
    assert format_sig(mpfr("-1.4595871344")) == "-1.459587134"
    assert format_sig(mpfr("1.23456789125e-7")) == "1.234567891e-7"
    assert format_sig(0) == "0.000000000"
    assert format_cell(None) == "" and format_cell(7) == "7"


def test_emit_csv_shape():
    out = emit_csv([[2, mpfr(4), None]], ["N", "W_0", "W_1"])
    assert out == b"N,W_0,W_1\n2,4.000000000,\n"
    with pytest.raises(InternalError):
        emit_csv([[1, 2]], ["a"])


def run_cli(capsysbinary, *argv):
    code = cli.run(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def test_ritz_row_ten(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "ritz", "--s", "0", "--alpha=-sqrt(2)", "--nmax", "10")
    assert code == 0
    assert out.decode().splitlines()[-1] == "10,4.000000000,7.693978891,11.50604238,15.37592718"


def test_output_is_byte_identical(capsysbinary, tmp_path):
    argv = ["ritz", "--s", "1", "--alpha", "sqrt(6)", "--nmax", "6"]
    first = run_cli(capsysbinary, *argv)[1]
    second = run_cli(capsysbinary, *argv)[1]
    run_cli(capsysbinary, *argv, "--output", str(tmp_path / "t.csv"))
    assert first == second == (tmp_path / "t.csv").read_bytes()


def test_map_json(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "map", "--l", "1", "--m", "1", "--M", "1", "--B0", "1", "--omega", "1")
    assert code == 0
    assert json.loads(out) == {"gamma": 1.0, "s": 1.0, "alpha": 1.0}


def test_map_rejects_bad_mass(capsysbinary):
    code, _, err = run_cli(capsysbinary, "map", "--l", "0", "--m", "-1", "--M", "1", "--B0", "1", "--omega", "1")
    assert code == 2 and err


@pytest.mark.parametrize("argv", [
    ["ritz", "--s", "0", "--alpha", "0", "--nmax", "3", "--bogus"],
    ["ritz", "--s", "0", "--alpha", "0", "--nmax", "3", "--precision", "32"],
    ["ritz", "--s", "0", "--alpha", "two", "--nmax", "3"],
    ["ritz", "--s", "0", "--alpha", "0", "--nmax", "3", "--nmin", "5"],
    ["rpm", "--s", "0", "--alpha", "0", "--dmax", "2"],
    ["frobnicate"],
])
def test_usage_errors(capsysbinary, argv):
    assert run_cli(capsysbinary, *argv)[0] == 2


def test_numerical_failure_exit(capsysbinary):
    code, _, err = run_cli(capsysbinary, "ritz", "--s", "0", "--alpha", "0", "--nmax", "24", "--precision", "64")
    assert code == 1 and "numerical" in err


def test_mismatch_exit(capsysbinary, monkeypatch):
    real = golden.load_golden

    def tampered(name):
        t = real(name)
        rows = list(t.rows)
        key, cells = rows[0]
        rows[0] = (key, ("4.00000001",) + cells[1:])
        return golden.GoldenTable(t.name, t.header, tuple(rows))

    monkeypatch.setattr(golden, "load_golden", tampered)
    code, _, err = run_cli(capsysbinary, "reproduce", "table1", "--check")
    assert code == 3 and "row 2" in err


def test_reproduce_table_check(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "reproduce", "table2", "--check")
    assert code == 0 and out.decode().startswith("N,W_0,W_1,W_2,W_3\n2,-1.180391283,4.000000000,,\n")


def test_truncate_outputs(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "truncate", "--n", "1", "--s", "0")
    data = json.loads(out)
    assert code == 0 and [d["nodes"] for d in data] == [0, 1] and data[0]["W"] == 4.0
    code, out, _ = run_cli(capsysbinary, "truncate", "--n", "1", "--s", "0", "--format", "csv")
    assert out == b"n,i,alpha,W\n1,1,-1.414213562,4.000000000\n1,2,1.414213562,4.000000000\n"


def test_sweep_writes_files(capsysbinary, tmp_path):
    prefix = str(tmp_path / "run")
    code, _, err = run_cli(capsysbinary, "sweep", "--s", "0", "--amin", "-1", "--amax", "1", "--points", "3",
                           "--levels", "2", "--overlay-nmax", "1", "--prefix", prefix)
    assert code == 0, err
    curves = (tmp_path / "run_curves.csv").read_text().splitlines()
    assert curves[0] == "alpha,W_0,W_1" and curves[2].startswith("0.000000000,2.000000000,6.000000000")
    points = (tmp_path / "run_points.csv").read_text().splitlines()
    assert points[0] == "n,i,alpha,W,residual" and len(points) == 4


def test_precision_environment(monkeypatch, capsysbinary):
    monkeypatch.setenv("QUADSPEC_PRECISION", "128")
    code, out, _ = run_cli(capsysbinary, "ritz", "--s", "0", "--alpha", "0", "--nmax", "4")
    assert code == 0 and b"2.000000000" in out


def test_run_leaves_caller_precision(capsysbinary):
    before = get_precision()
    run_cli(capsysbinary, "ritz", "--s", "0", "--alpha", "0", "--nmax", "3", "--precision", "80")
    assert get_precision() == before
