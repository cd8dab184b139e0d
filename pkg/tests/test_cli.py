import json
import math

import numpy as np
import pytest

from heisenberg_xy import analytic, cli, dynamics, fileio
from heisenberg_xy.errors import NumericError, UsageError


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_evolve_fig1(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    assert run("evolve", "--gamma", 0.3, "--omega", 1, "--j", 0.1, "--delta", 0.1, "--initial", "gg", "--out", out) == 0
    times, gt, c, states = fileio.read_trajectory_csv(out)
    assert abs(c[-1] - 0.09309) < 1e-4
    assert math.isclose(gt[-1], 30.0, rel_tol=1e-12)
    assert capsys.readouterr().out.startswith("steady_C=")


def test_evolve_fig2_bell(tmp_path):
    out = tmp_path / "fig2.csv"
    code = run(
        "evolve", "--gamma", 0.458, "--omega", 1, "--j", 0.1, "--delta", 0.458, "--initial", "bell_gg_ee", "--out", out
    )
    assert code == 0
    assert abs(fileio.read_trajectory_csv(out)[2][-1] - 0.28916) < 1e-4


def test_evolve_from_matrix_file(tmp_path):
    rho_path = tmp_path / "rho.txt"
    rho_path.write_text("0 0 0 0\n0 0.25 0.25 0\n0 0.25 0.25 0\n0 0 0 0.5\n")
    out = tmp_path / "t.csv"
    assert run("evolve", "--initial", rho_path, "--t-max", 5, "--out", out) == 0
    assert run("evolve", "--initial", "nonexistent_state", "--out", out) == 2


def test_evolve_restriction_exit(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert run("evolve", "--delta", 0.5, "--out", out) == 2
    err = capsys.readouterr().err
    assert "restriction" in err and "0.1" in err
    assert not out.exists()
    assert run("evolve", "--delta", 0.5, "--allow-restricted", "--t-max", 1, "--out", out) == 0


def test_evolve_rejects_oversized_step(tmp_path):
    assert run("evolve", "--dt", 10, "--out", tmp_path / "x.csv") == 2


def test_evolve_numeric_failure_exit(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericError("positivity lost; reduce dt")

    monkeypatch.setattr(dynamics, "integrate", boom)
    assert run("evolve", "--out", tmp_path / "x.csv") == 3


def test_steady_all_agrees(tmp_path):
    out = tmp_path / "steady.jsonl"
    assert run("steady", "--method", "all", "--out", out) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["method"] for r in records] == ["analytic", "nullspace", "longtime", "cross_validation"]
    assert records[-1]["agree"] is True
    assert records[-1]["max_pairwise_deviation"] < 1e-6
    for r in records[:3]:
        assert abs(r["C"] - 0.09309) < 1e-4


def test_steady_finite_temperature_methods():
    p = cli.FIG2.with_(nbar=0.5)
    a, n = (cli.steady_records(p, m)[0] for m in ("analytic", "nullspace"))
    keys = [k for k in a if k.startswith("rho")]
    assert max(abs(a[k] - n[k]) for k in keys) < 1e-8
    hot = cli.steady_records(cli.FIG1.with_(nbar=1e6), "analytic")[0]
    assert hot["C"] == 0 and hot["C_formula"] == 0


def test_steady_disagreement_exit(tmp_path, monkeypatch):
    real = analytic.steady_state_t0

    def typo(p):
        res = real(p)
        rho = res.rho.copy()
        rho[0, 3] *= 1.01
        rho[3, 0] *= 1.01
        return analytic.AnalyticSteadyState(rho=rho, regime=res.regime, residual=res.residual)

    monkeypatch.setattr(analytic, "steady_state_t0", typo)
    out = tmp_path / "s.jsonl"
    assert run("steady", "--method", "all", "--out", out) == 4
    assert json.loads(out.read_text().splitlines()[-1])["agree"] is False


def test_steady_stdout(capsys):
    assert run("steady", "--method", "nullspace") == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["method"] == "nullspace"


def test_sweep_grid_and_ridge(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("sweep", "--grid", "0:5:400,0:3:400", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(cli.SWEEP_HEADER)
    rows = [line.split(",") for line in lines[1:]]
    points = [r for r in rows if r[0] == "point"]
    ridges = [r for r in rows if r[0] == "ridge"]
    assert len(points) == 400 * 400 and len(ridges) == 400
    assert abs(max(float(r[4]) for r in points) - 0.3090170) < 1e-4
    step = 3 / 399
    for r in ridges:
        if float(r[5]) <= 3:
            assert abs(float(r[2]) - float(r[5])) <= step


def test_sweep_over_temperature(tmp_path):
    p = cli.FIG2
    nstar = analytic.vanishing_temperature(p)
    wb, db = p.omega / p.gamma, p.delta / p.gamma
    out = tmp_path / "n.csv"
    assert run("sweep", "--grid", f"{wb!r},{db!r},0:{1.5 * nstar!r}:301", "--out", out) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:] if line.startswith("point")]
    n = np.array([float(r[3]) for r in rows])
    c = np.array([float(r[4]) for r in rows])
    assert np.all(np.diff(c) <= 0)
    first_zero = n[np.argmax(c == 0)]
    assert abs(first_zero - nstar) <= n[1] - n[0]


@pytest.mark.parametrize("text", ["0:5", "0:5:1", "a,b", "0:5:10"])
def test_sweep_grid_parse_errors(text):
    with pytest.raises(UsageError):
        cli.SweepGrid.parse(text)


def test_figures_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("figures", "--outdir", a) == 0
    assert run("figures", "--outdir", b, "--workers", 3) == 0
    for name in ("fig1", "fig2", "fig3", "fig4"):
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
    fig4 = (a / "fig4.csv").read_text().splitlines()
    first = [float(x) for x in fig4[1].split(",")]
    assert first[0] == 0
    assert abs(first[1] - analytic.steady_concurrence_t0(cli.FIG1)) < 1e-10
    assert abs(first[2] - analytic.steady_concurrence_t0(cli.FIG2)) < 1e-10
    fig1 = (a / "fig1.csv").read_text().splitlines()
    last = [float(x) for x in fig1[-1].split(",")]
    assert math.isclose(last[0], 10.0, rel_tol=1e-12)
    assert max(abs(x - 0.09309) for x in last[1:]) < 1e-3
