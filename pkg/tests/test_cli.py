"""Command line: parsing, exit codes, output schemas and field export."""

import io
import json
import math

import numpy as np
import pytest

from gapwell import cli
from gapwell.analysis import evaluate
from gapwell.analysis.sweep import synthetic_row
from gapwell import geometry as geo
from gapwell.modematch import find_ground_state_half

PI = math.pi


def _json_out(capsys, argv):
    code = cli.main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_parse_single_window():
    cfg = cli.parse_args(["solve2d", "--d1", "3.14159", "--d2", "3.14159", "--windows", "0:0.2"])
    assert cfg.command == "solve2d"
    assert cfg.windows == [(0.0, 0.2)]
    assert cfg.d1 == cfg.d2 == 3.14159
    assert cfg.fmt == "json"


def test_overlapping_windows_exit(capsys):
    assert cli.main(["solve2d", "--windows", "0:0.3,0.5:0.3"]) == cli.EXIT_INPUT
    assert "OverlappingWindows" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["solve2d"], ["solve3d"], ["sweep"], ["fit"],
                                  ["nonsense"], ["solve2d", "--windows", "0:abc"],
                                  ["solve2d", "--windows", "0:0.2", "--format", "xml"]])
def test_usage_errors(argv):
    assert cli.main(argv) == cli.EXIT_INPUT


def test_solve2d_json(capsys):
    code, obj = _json_out(capsys, ["solve2d", "--windows", "0:0.2"])
    assert code == cli.EXIT_OK
    assert list(obj) == list(cli.COLUMNS)
    assert obj["gap"] < 0 and obj["status"] == "ok"
    assert obj["windows"] == [[0.0, 0.2]]
    assert obj["gap"] <= obj["gap_variational"] <= obj["gap_paper_bound"]


def test_solve3d_below_floor(capsys):
    code, obj = _json_out(capsys, ["solve3d", "--radius", "0.1"])
    assert code == cli.EXIT_NO_BOUND
    assert obj["status"] == "BelowNumericalFloor"


def test_json_round_trip_is_exact(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["solve2d", "--windows", "0:0.2", "--out", str(out)]) == 0
    got = json.loads(out.read_text())
    g = geo.StripGeometry(PI, PI, [geo.Window(0.0, 0.2)])
    ref = evaluate(g, 0.2).record()
    for k in cli.COLUMNS:
        if isinstance(ref[k], float) and math.isnan(ref[k]):
            assert math.isnan(got[k])
        else:
            assert got[k] == ref[k], k


def test_csv_schema_and_json_agree(tmp_path):
    csv_path, json_path = tmp_path / "s.csv", tmp_path / "s.json"
    base = ["sweep", "--a-list", "0.1,0.2", "--windows", "0:1"]
    assert cli.main(base + ["--format", "csv", "--out", str(csv_path)]) == 0
    assert cli.main(base + ["--out", str(json_path)]) == 0
    lines = csv_path.read_text().splitlines()
    head = [ln for ln in lines if ln.startswith("#")]
    assert len(head) == 3
    assert head[0].startswith("# gapwell ")
    assert "sweep --a-list 0.1,0.2" in head[1]
    assert head[2].startswith("# timestamp: ")
    assert lines[3] == ",".join(cli.COLUMNS)
    gap_cell = lines[4].split(",")[cli.COLUMNS.index("gap")]
    assert len(gap_cell.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) == 17
    from_csv = cli.read_records(csv_path)
    from_json = cli.read_records(json_path)
    assert len(from_csv) == len(from_json) == 2
    for a, b in zip(from_csv, from_json):
        for k in cli.COLUMNS:
            va, vb = a[k], b[k]
            if isinstance(va, float) and math.isnan(va):
                assert math.isnan(vb)
            else:
                assert va == vb, k


def test_config_matches_flags(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[geometry]\nd1 = 2.5\nd2 = 2.5\nwindows = 0:0.2\n"
                   "[solver]\ntol_rel = 1e-9\n[sweep]\na_list = 0.3,0.4\nformat = csv\n")
    a = cli.parse_args(["sweep", "--config", str(ini)])
    b = cli.parse_args(["sweep", "--d1", "2.5", "--d2", "2.5", "--windows", "0:0.2",
                        "--tol-rel", "1e-9", "--a-list", "0.3,0.4", "--format", "csv"])
    fields = ("d1", "d2", "windows", "tol_rel", "a_list", "fmt")
    assert [getattr(a, f) for f in fields] == [getattr(b, f) for f in fields]
    c = cli.parse_args(["sweep", "--config", str(ini), "--a-list", "0.05,0.1,0.2",
                        "--out", "r.csv"])
    assert c.a_list == [0.05, 0.1, 0.2] and c.out == "r.csv" and c.d1 == 2.5


def test_io_errors(tmp_path):
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.ini"),
                     "--a-list", "0.1"]) == cli.EXIT_IO
    assert cli.main(["fit", "--input", str(tmp_path / "missing.csv")]) == cli.EXIT_IO
    bad_dir = tmp_path / "no" / "such" / "dir" / "x.json"
    assert cli.main(["solve2d", "--windows", "0:0.2", "--out", str(bad_dir)]) == cli.EXIT_IO


def test_fit_and_verify_commands(tmp_path, capsys):
    rows = [synthetic_row(a, -(0.1 + a) * (2 * a * a) ** 2) for a in (0.05, 0.1, 0.15, 0.2)]
    cfg = cli.RunConfig(command="sweep", argv=["sweep"])
    path = tmp_path / "t.csv"
    path.write_text(cli.rows_to_csv([r.record() for r in rows], cfg))
    code, fit = _json_out(capsys, ["fit", "--input", str(path)])
    # the coefficient (0.1 + a) drifts, so the exponent sits above 2 on this table
    assert code == 0 and fit["model"] == "power_law" and fit["exponent"] > 2.0
    code, rep = _json_out(capsys, ["verify", "--input", str(path)])
    assert code == 0 and rep["pass"] and 0 < rep["c2"] <= rep["c1"]
    assert cli.main(["fit", "--input", str(path), "--model", "exp_inverse_cube"]) == cli.EXIT_INPUT
    assert "InsufficientRows" in capsys.readouterr().err


def test_record_to_row_dimension():
    r2 = synthetic_row(0.2, -1e-4)
    r3 = synthetic_row(1.0, -1e-6, dim=3)
    assert cli.record_to_row(r2.record()).dim == 2
    assert cli.record_to_row(r3.record()).dim == 3


# ----------------------------------------------------------------- field

@pytest.fixture(scope="module")
def res02():
    return find_ground_state_half(PI, 0.2)


def _field_table(res, xs, ys):
    buf = io.StringIO()
    cli.emit_field(res, (xs, ys), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,y,psi"
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return data[:, 2].reshape(len(xs), len(ys))


def test_field_dirichlet_line(res02):
    ys = np.linspace(0.0, PI, 5)
    psi = _field_table(res02, np.linspace(-2.0, 2.0, 9), ys)
    assert np.max(np.abs(psi[:, -1])) < 1e-12 * np.max(np.abs(psi))


def test_field_even_in_x(res02):
    xs = np.linspace(-3.0, 3.0, 13)
    psi = _field_table(res02, xs, np.linspace(-2.5, 2.5, 7))
    assert np.max(np.abs(psi - psi[::-1])) < 1e-8 * np.max(np.abs(psi))


def test_field_far_slope(res02):
    kappa = math.sqrt(-res02.gap)
    xs = np.array([40.0, 60.0]) / kappa * 0.1
    psi = _field_table(res02, xs, np.array([PI / 2]))
    slope = (math.log(abs(psi[1, 0])) - math.log(abs(psi[0, 0]))) / (xs[1] - xs[0])
    assert slope == pytest.approx(-kappa, rel=0.01)


def test_cli_field_file(tmp_path):
    out = tmp_path / "f.csv"
    code = cli.main(["solve2d", "--windows", "0:0.5", "--field", str(out),
                     "--grid=-1:1:5,-1:1:3", "--out", str(tmp_path / "r.json")])
    assert code == 0
    assert len(out.read_text().splitlines()) == 1 + 15
