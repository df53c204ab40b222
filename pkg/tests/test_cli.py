import csv
import json

import pytest

from gzkstab.cli import RunConfig, build_parser, main, make_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_wave_command_writes_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "wave", "--p", 1, "--L", 7, "--out", tmp_path, "--formats", "json,svg")
    assert code == 0
    doc = json.loads((tmp_path / "wave.json").read_text())
    assert doc["kind"] == "wave" and doc["params"]["L"] == 7.0
    svg = (tmp_path / "wave.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<image" not in svg and "href=\"http" not in svg


def test_usage_errors_exit_one(capsys):
    assert run(capsys, "wave", "--N", 7)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "sweep")[0] == 1
    assert run(capsys, "wave", "--branch", "wiggly")[0] == 1


def test_numerical_refusal_exits_two(tmp_path, capsys):
    code, _, err = run(capsys, "wave", "--p", 1, "--c", 1, "--L", 6, "--out", tmp_path)
    assert code == 2
    assert "period below α(c)" in err


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\np = 2\nL = 9.5  # period\nquad-tol = 1e-11\n")
    args = build_parser().parse_args(["wave", "--config", str(cfg), "--L", "8"])
    c = make_config(args)
    assert (c.p, c.L, c.quad_tol, c.c) == (2.0, 8.0, 1e-11, RunConfig().c)


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("speed = 3\n")
    assert run(capsys, "wave", "--config", cfg)[0] == 1


def test_defaults_listing(capsys):
    code, out, _ = run(capsys, "defaults")
    assert code == 0 and "verdict_threshold=0.0001" in out


def test_analyze_outputs_and_wave_reuse(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "wave", "--p", 2, "--L", 9, "--out", a)[0] == 0
    code, out, _ = run(capsys, "analyze", "--wave", a / "wave.json", "--out", a, "--formats", "json,csv,svg")
    assert code == 0 and "verdict=unstable_by_theorem" in out
    for name in ("verdict.json", "spectrum_0.json", "spectrum_k0_half.json", "spectrum_k0.json",
                 "growth.csv", "growth.svg", "wave.svg"):
        assert (a / name).exists()
    assert run(capsys, "analyze", "--p", 2, "--L", 9, "--out", b)[0] == 0
    assert (a / "verdict.json").read_bytes() == (b / "verdict.json").read_bytes()
    assert (a / "growth.csv").read_bytes() == (b / "growth.csv").read_bytes()


def test_sweep_order_independent_of_workers(tmp_path, capsys):
    base = ["sweep", "--p", 1, "--c-range", "1:2:2", "--L-range", "5:9:2"]
    assert run(capsys, *base, "--out", tmp_path / "one")[0] == 0
    assert run(capsys, *base, "--out", tmp_path / "two", "--workers", 2)[0] == 0
    one = (tmp_path / "one" / "sweep.csv").read_bytes()
    assert one == (tmp_path / "two" / "sweep.csv").read_bytes()
    table = rows(tmp_path / "one" / "sweep.csv")
    assert [(r[1], r[2]) for r in table[1:]] == [("1", "5"), ("1", "9"), ("2", "5"), ("2", "9")]
    # L = 5 < 2 pi has no wave at c = 1; the cell is recorded, not fatal
    assert table[1][4] == "failed: NoWaveForPeriodError" and table[2][4] == "ok"


def test_single_cell_sweep_matches_analyze(tmp_path, capsys):
    run(capsys, "sweep", "--p", 1, "--L", 8, "--c-range", "1", "--out", tmp_path)
    code, out, _ = run(capsys, "analyze", "--p", 1, "--L", 8, "--out", tmp_path)
    row = dict(zip(*rows(tmp_path / "sweep.csv")))
    v = json.loads((tmp_path / "verdict.json").read_text())
    assert row["verdict"] == v["verdict"]
    assert float(row["max_growth"]) == pytest.approx(v["max_growth"], rel=1e-9)
    assert float(row["k0"]) == pytest.approx(v["k0"], rel=1e-9)


def test_spectrum_and_index_commands(tmp_path, capsys):
    code, _, _ = run(capsys, "spectrum", "--operator", "T", "--k", 0.3, "--L", 8, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "spectrum_T.json").read_text())
    assert doc["k"] == 0.3 and len(doc["eigenvalues"]) > 0
    assert run(capsys, "index", "--L", 8, "--out", tmp_path)[0] == 0
    idx = json.loads((tmp_path / "index.json").read_text())
    assert idx["nR0_direct"] == 1


def test_evolve_command(tmp_path, capsys):
    code, out, _ = run(capsys, "evolve", "--p", 2, "--L", 9, "--k-frac", 0.5, "--T", 40, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "evolve.json").read_text())
    assert doc["rate"] == pytest.approx(doc["eigenvalue_max_real"], rel=0.02)
