import json
import math
import subprocess
import sys

import numpy as np
import pytest

from infall.binding import TwoBodyConfig, solve_state, state_invariant_residuals, system_residuals
from infall.cli import UsageError, main, parse_args, run, run_many
from infall.plot import render_plot, render_svg
from infall.tables import OutputTable, dumps_table, read_table, write_table

SQRT2 = math.sqrt(2.0)


def cli(*args):
    return subprocess.run([sys.executable, "-m", "infall", *args], capture_output=True, check=False)


# --- parsing --------------------------------------------------------------------

def test_defaults():
    spec = parse_args(["general"])
    assert spec.cfg == TwoBodyConfig(m1_inf=1.0, s=SQRT2, G=1.0, c=1.0)
    assert spec.grid.count == 512 and spec.fmt == "csv" and spec.out is None
    assert spec.units == "geom"


def test_figure1_preset():
    spec = parse_args(["figure1"])
    assert (spec.cfg.m1_inf, spec.cfg.s) == (1.0, SQRT2)
    assert (spec.grid.variable, spec.grid.lo) == ("eb", 0.0)
    assert spec.grid.hi == pytest.approx(SQRT2, abs=1e-15)


def test_eb_max_auto_resolves_to_critical():
    spec = parse_args(["general", "--m1", "1", "--s", "2", "--eb-max", "auto"])
    assert spec.grid.hi == pytest.approx(3 - math.sqrt(3), abs=1e-15)


def test_figure_presets_for_r_kinds():
    f3, f4 = parse_args(["figure3"]), parse_args(["figure4"])
    assert (f3.cfg.s, f3.grid.hi, f3.grid.lo) == (1e4, 60000.0, 0.06)
    assert (f4.cfg.s, f4.grid.hi) == (1.0, 3.0)


@pytest.mark.parametrize("argv, flag", [
    (["general", "--c", "-1"], "--c"),
    (["general", "--s", "0.5"], "--s"),
    (["general", "--samples", "1"], "--samples"),
    (["general", "--eb-max", "9"], "--eb-max"),
    (["general", "--eb-min", "0"], "--eb-min"),
    (["general", "--r-max", "3"], "--r-max"),
    (["figure4", "--s", "2"], "--s"),
    (["celestial", "--r-min", "5", "--r-max", "4"], "--r-min"),
    (["general", "--m1", "abc"], "--m1"),
    (["general", "--bogus"], "--bogus"),
])
def test_usage_errors_name_the_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_args(argv)


def test_main_exit_codes(tmp_path, capsys):
    assert main(["general", "--c", "-1"]) == 1
    assert "--c" in capsys.readouterr().err
    assert main(["nonsense"]) == 1
    out = tmp_path / "t.csv"
    assert main(["figure1", "--samples", "4", "--out", str(out)]) == 0
    # a grid point past the annihilation stop gives a partial table
    ec_minus = repr(SQRT2 * (1 - 1e-13))
    assert main(["general", "--samples", "4", "--eb-max", ec_minus, "--out", str(out)]) == 2
    assert read_table(out).metadata["partial"] is True


def test_unwritable_output_is_a_failure(tmp_path):
    assert main(["figure1", "--samples", "4", "--out", str(tmp_path / "missing" / "x.csv")]) == 2


# --- tables -----------------------------------------------------------------------

def test_figure1_rows():
    t = run(parse_args(["figure1", "--samples", "32"]))
    assert t.columns == ["eb", "m1", "m2", "v1_abs", "f1"]
    first, last = t.rows[0], t.rows[-1]
    assert first[:4] == [0.0, 1.0, pytest.approx(SQRT2, abs=1e-15), 0.0]
    assert first[4] == pytest.approx(SQRT2 / (1 + SQRT2), abs=1e-15)
    assert last[0] == pytest.approx(SQRT2, abs=1e-15)
    assert (last[1], last[3]) == (0.0, 1.0)
    assert last[2] == pytest.approx(1.0, abs=1e-15)
    assert last[4] == pytest.approx(1 / SQRT2, abs=1e-15)


def test_figure2_table():
    t = run(parse_args(["figure2", "--samples", "40"]))
    assert t.columns == ["eb", "m1", "m2", "v1_abs", "f1", "r"]
    r = np.array(t.column("r"))
    assert np.all(np.diff(t.column("eb")) > 0)
    assert np.all(np.diff(r) < 0)
    assert r[-1] == 0.0 and t.metadata["limit_rows"] == [39]
    assert t.metadata["solver"]["stop_reason"] == "m1_floor"


def test_figure3_row_at_ten_thousand():
    t = run(parse_args(["figure3", "--r-min", "10000", "--r-max", "60000", "--samples", "6"]))
    assert t.columns == ["r", "m1", "eb", "v1_abs"]
    row = t.rows[t.column("r").index(10000.0)]
    assert row[1] == pytest.approx(math.exp(-1), rel=1e-15)
    assert t.rows[0][0] == 0.0 and t.metadata["limit_rows"] == [0]


def test_figure4_table():
    t = run(parse_args(["figure4", "--samples", "16"]))
    assert t.columns == ["r", "m1", "eb1", "v1_abs"]
    assert np.all(np.diff(t.column("r")) > 0)
    for r, m1, eb1, v in t.rows:
        den = 1 + 2 * r
        assert eb1 == pytest.approx(1 / den, rel=1e-14)
        assert m1 == pytest.approx(2 * r / den, rel=1e-14, abs=1e-300)


def test_with_time_and_errata_columns():
    t = run(parse_args(["figure3", "--samples", "16", "--with-time", "--errata-diagnostic"]))
    assert t.columns == ["r", "m1", "eb", "v1_abs", "t", "v1_printed"]
    ts = t.column("t")
    assert all(a > b for a, b in zip(ts, ts[1:])) and ts[-1] == 0.0
    g = run(parse_args(["figure2", "--samples", "16", "--errata-diagnostic"]))
    assert g.metadata["errata_diagnostic"]["m2_printed_at_0"] == pytest.approx(-SQRT2, rel=1e-15)
    assert g.metadata["riccati_printed_max_scaled_residual"] > 0.1
    assert g.metadata["solver"]["max_residual"] < 1e-8


def test_rows_reconstitute_to_valid_states(rng):
    cfg = TwoBodyConfig()
    t = run(parse_args(["figure2", "--samples", "64"]))
    for i in rng.choice(len(t.rows), 10, replace=False):
        eb, m1, m2, v1, f1, r = t.rows[i]
        st = solve_state(eb, cfg)
        res = state_invariant_residuals(st, cfg)
        assert max(abs(v) for v in res.values()) < 1e-10
        assert (m1, m2, f1) == (st.m1, st.m2, st.f1)
        r1, r2 = system_residuals(f1, v1 * v1, eb, cfg)
        assert max(abs(r1), abs(r2)) < 1e-10


def test_csv_format_and_round_trip(tmp_path):
    table = OutputTable(["a", "b"], [[0.5, 1 / 3], [math.pi, -1e-300]], {})
    text = dumps_table(table, "csv")
    assert text.splitlines()[0] == "a,b"
    assert text.splitlines()[1].startswith("0.5,")
    path = tmp_path / "x.csv"
    write_table(table, "csv", path)
    back = read_table(path)
    assert back.rows == table.rows and back.columns == table.columns


def test_json_format(tmp_path):
    t = run(parse_args(["figure1", "--samples", "32", "--errata-diagnostic"]))
    obj = json.loads(dumps_table(t, "json"))
    assert len(obj["rows"]) == 32
    assert obj["metadata"]["kind"] == "figure1"
    # the printed f1 is undefined at eb = 0
    assert obj["rows"][0][-1] is None
    path = tmp_path / "x.json"
    write_table(t, "json", path)
    back = read_table(path)
    assert back.rows[5] == t.rows[5]


def test_output_table_validates_rows():
    with pytest.raises(ValueError):
        OutputTable(["a"], [[1.0, 2.0]])


def test_run_many_matches_sequential():
    specs = [parse_args(["figure1", "--samples", "8"]), parse_args(["figure4", "--samples", "8"])]
    par = run_many(specs, workers=2)
    seq = run_many(specs, workers=1)
    assert [p.rows for p in par] == [s.rows for s in seq]


# --- plots ------------------------------------------------------------------------

def test_plot_deterministic_and_polylines(tmp_path):
    t = run(parse_args(["figure4", "--samples", "32"]))
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render_plot(t, a)
    render_plot(t, b)
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.count("<polyline") == 3
    for name in ("m1", "eb1", "v1_abs", "r"):
        assert f">{name}<" in text


def test_plot_constant_column():
    svg = render_svg(OutputTable(["x", "y"], [[0.0, 2.0], [1.0, 2.0], [2.0, 2.0]]))
    line = next(ln for ln in svg.splitlines() if ln.startswith("<polyline"))
    ys = {p.split(",")[1] for p in line.split('points="')[1].rstrip('"/>').split()}
    assert len(ys) == 1


def test_plot_needs_two_rows():
    with pytest.raises(ValueError):
        render_svg(OutputTable(["x", "y"], [[0.0, 1.0]]))


# --- end to end ---------------------------------------------------------------------

def test_cli_determinism_and_plot(tmp_path):
    p1, p2 = tmp_path / "1.svg", tmp_path / "2.svg"
    a = cli("figure1", "--samples", "32", "--plot", str(p1))
    b = cli("figure1", "--samples", "32", "--plot", str(p2))
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout and a.stdout
    assert p1.read_bytes() == p2.read_bytes()


def test_cli_json_to_file(tmp_path):
    out = tmp_path / "g.json"
    res = cli("general", "--m1", "1", "--s", "2", "--samples", "20", "--format", "json", "--out", str(out))
    assert res.returncode == 0 and res.stdout == b""
    obj = json.loads(out.read_text())
    assert len(obj["rows"]) == 20
    assert obj["metadata"]["grid"]["max"] == pytest.approx(3 - math.sqrt(3), abs=1e-15)


def test_si_units():
    spec = parse_args(["general", "--units", "si", "--s", "2", "--samples", "5"])
    assert spec.cfg.G == 6.6743e-11 and spec.cfg.c == 299_792_458.0
    t = run(spec)
    assert t.column("v1_abs")[-1] == 299_792_458.0
