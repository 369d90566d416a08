import io
import json
import math

import pytest

from pgfluct import cli, kernels
from pgfluct.records import CSV_COLUMNS, read_sweep_csv


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


POINT = ["--mass", "1", "--temp", "1", "--radius", "1"]


def test_compute_json(capsys):
    code, out, _ = run(["compute", "--gauge", "hw", *POINT], capsys)
    assert code == cli.EXIT_OK
    rec = json.loads(out)
    assert rec["gauge"] == "hw" and rec["converged"]
    assert rec["sigma_n"] == pytest.approx(math.sqrt(rec["sigma2"]) / rec["epsilon"], rel=1e-15)


def test_compute_br_matches_can(capsys):
    rows = []
    for g in ("br", "can"):
        code, out, _ = run(["compute", "--gauge", g, "--format", "csv", *POINT], capsys)
        assert code == 0
        header, body, _ = read_sweep_csv(out)
        rows.append(dict(zip(header, body[0])))
    assert tuple(header) == CSV_COLUMNS
    for col in ("epsilon", "sigma2", "sigma_n", "sigma2_err"):
        assert rows[0][col] == rows[1][col]
    assert (rows[0]["gauge"], rows[1]["gauge"]) == ("br", "can")


@pytest.mark.parametrize("argv,needle", [
    (["compute", "--gauge", "glw", "--mass", "0", "--temp", "1", "--radius", "1"], "1/m^2"),
    (["compute", "--gauge", "hw", "--temp", "1", "--radius", "1"], "--mass"),
    (["compute", "--gauge", "nope", *POINT], "pseudo-gauge"),
    (["compute", "--gauge", "can", "--mass", "1", "--temp", "-1", "--radius", "1"], "temperature"),
    (["compute", "--gauge", "can", "--mass", "1", "--temp", "1", "--radius", "0"], "radius"),
    (["sweep", "--param", "temperature", "--from", "0", "--to", "1", "--points", "3"], "from > 0"),
    (["sweep", "--param", "mass", "--from", "0", "--to", "1", "--points", "3", "--spacing",
      "linear", "--gauges", "glw"], "mass"),
    (["sweep", "--param", "radius_a", "--from", "1", "--to", "2"], "--points"),
    (["frobnicate"], "invalid choice"),
])
def test_invalid_input_exits_1(argv, needle, capsys):
    code, out, err = run(argv, capsys)
    assert code == cli.EXIT_INPUT
    assert needle in err
    assert out == ""


def test_nonconvergence_exits_2(capsys, monkeypatch):
    from pgfluct.quadrature import QuadratureConfig
    monkeypatch.setattr(cli, "_config",
                        lambda args: QuadratureConfig(rel_tol=1e-12, max_evals=10_000))
    code, out, _ = run(["compute", "--gauge", "can", *POINT], capsys)
    assert code == cli.EXIT_NONCONVERGED
    assert json.loads(out)["converged"] is False


SWEEP = ["sweep", "--param", "radius_a", "--from", "0.5", "--to", "10", "--points", "8",
         "--gauges", "can,glw,hw"]


@pytest.fixture(scope="module")
def sweep_csv():
    buf = io.StringIO()
    args = cli.parse_args(SWEEP)
    assert cli.cmd_sweep(args, buf) == 0
    return buf.getvalue()


def test_sweep_rows_and_convergence(sweep_csv):
    assert sweep_csv.startswith("# schema=1\n")
    header, rows, _ = read_sweep_csv(sweep_csv)
    assert len(rows) == 24
    col = {c: header.index(c) for c in header}
    by_a = {}
    for r in rows:
        by_a.setdefault(float(r[col["a"]]), {})[r[col["gauge"]]] = float(r[col["sigma2"]])
    radii = sorted(by_a)
    devs = [max(abs(by_a[a][g] / by_a[a]["can"] - 1) for g in ("glw", "hw")) for a in radii]
    assert devs[-1] < 0.05 and devs[-1] < devs[0]
    assert all(r[col["converged"]] == "true" for r in rows)


def test_sweep_parallel_is_identical(sweep_csv):
    buf = io.StringIO()
    assert cli.cmd_sweep(cli.parse_args(SWEEP + ["--jobs", "2"]), buf) == 0
    assert buf.getvalue() == sweep_csv


def test_sweep_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# radius scan\nparam = radius_a\nfrom = 1\nto = 2\npoints = 3\n"
                   "gauges = can\nspacing = linear\n")
    code, out, _ = run(["sweep", "--config", str(cfg), "--points", "2"], capsys)
    assert code == 0
    _, rows, _ = read_sweep_csv(out)
    assert [float(r[0]) for r in rows] == [1.0, 2.0]


def test_sweep_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("param = radius_a\ncolour = blue\n")
    code, _, err = run(["sweep", "--config", str(cfg)], capsys)
    assert code == 1 and "bad.cfg:2" in err


def test_sweep_output_file(tmp_path, capsys):
    dest = tmp_path / "out.csv"
    code, out, _ = run(["sweep", "--param", "mass", "--from", "1", "--to", "2", "--points", "2",
                        "--gauges", "can", "-o", str(dest)], capsys)
    assert code == 0 and out == ""
    assert len(read_sweep_csv(dest.read_text())[1]) == 2


def test_plot_round_trip(tmp_path, sweep_csv, capsys):
    src = tmp_path / "sweep.csv"
    src.write_text(sweep_csv)
    svg = tmp_path / "sweep.svg"
    code, _, _ = run(["plot", str(src), "--logx", "--logy", "-o", str(svg)], capsys)
    assert code == 0
    assert svg.read_text().lstrip().startswith("<?xml")
    side = (tmp_path / "sweep.data.csv").read_text().splitlines()
    header, rows, _ = read_sweep_csv(sweep_csv)
    expected = [f"{r[header.index('a')]},{r[header.index('sigma_n')]},{r[header.index('gauge')]}"
                for r in rows]
    assert side == ["a,sigma_n,gauge"] + expected
    assert src.read_text() == sweep_csv


def test_plot_is_reproducible(tmp_path, sweep_csv, capsys):
    src = tmp_path / "s.csv"
    src.write_text(sweep_csv)
    run(["plot", str(src), "-o", str(tmp_path / "a.svg")], capsys)
    run(["plot", str(src), "-o", str(tmp_path / "b.svg")], capsys)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_plot_single_row(tmp_path, sweep_csv, capsys):
    lines = sweep_csv.splitlines()
    src = tmp_path / "one.csv"
    src.write_text("\n".join(lines[:3]) + "\n")
    code, _, _ = run(["plot", str(src), "-o", str(tmp_path / "one.svg")], capsys)
    assert code == 0 and (tmp_path / "one.svg").exists()


@pytest.mark.parametrize("body,needle", [
    ("", "empty"),
    ("a,m,T\n", "empty"),
    ("a,sigma_n,gauge\n1.0,0.5,can\n2.0,0.4\n", "line 3"),
    ("a,sigma_n,gauge\n1.0,oops,can\n", "line 2"),
    ("x,y\n1,2\n", "missing column"),
])
def test_plot_rejects_bad_csv(tmp_path, body, needle, capsys):
    src = tmp_path / "bad.csv"
    src.write_text(body)
    svg = tmp_path / "bad.svg"
    code, _, err = run(["plot", str(src), "-o", str(svg)], capsys)
    assert code == 1 and needle in err
    assert not svg.exists() and not (tmp_path / "bad.data.csv").exists()


def test_plot_refuses_to_overwrite_input(tmp_path, sweep_csv, capsys):
    src = tmp_path / "s.csv"
    src.write_text(sweep_csv)
    code, _, err = run(["plot", str(src), "-o", str(tmp_path / "s.svg"), "--data", str(src)],
                       capsys)
    assert code == 1 and "overwrite" in err
    assert src.read_text() == sweep_csv


def test_check_quick_passes(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, out, _ = run(["check", "--quick", "--report", str(report)], capsys)
    assert code == cli.EXIT_OK
    assert "13/13 checks passed" in out
    assert all(c["passed"] for c in json.loads(report.read_text())["checks"])


def test_check_catches_broken_prefactor(monkeypatch, capsys):
    real = kernels.gauge_prefactor

    def broken(gauge, mass):
        return 1.01 * real(gauge, mass) if str(gauge).lower().endswith("hw") else real(gauge, mass)
    monkeypatch.setattr(kernels, "gauge_prefactor", broken)
    code, out, _ = run(["check", "--quick"], capsys)
    assert code == cli.EXIT_CHECK
    assert "[FAIL] coincidence identity" in out
