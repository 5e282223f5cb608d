import csv
import io
import json
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from cact import cli
from cact.committee import gamma_from_counts
from cact.scenario_file import bundled

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def three_file(tmp_path):
    path = tmp_path / "three.json"
    path.write_text(json.dumps(bundled("three_signal")))
    return str(path)


def invoke(runner, *args):
    return runner.invoke(cli.main, list(args), catch_exceptions=False)


def test_analyze(runner, three_file):
    res = invoke(runner, "analyze", "--scenario", three_file)
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["environment"] == "discouragement"
    assert data["maximal"] == {"P1": [3], "P2": [3]}
    assert data["s_star"] == pytest.approx(13.5)
    assert len(data["equilibria"]) == 2


def test_analyze_csv(runner, three_file):
    res = invoke(runner, "--out", "csv", "analyze", "--scenario", three_file)
    rows = list(csv.DictReader(io.StringIO(res.output)))
    assert rows[0]["s_star"] == "13.5"


def test_sweep_matches_golden(three_file):
    res = CliRunner().invoke(cli.main, ["sweep", "--scenario", three_file, "--pair", "1", "2",
                                        "--alpha-max", "0.01", "--steps", "5"])
    assert res.exit_code == 0
    assert res.stdout == (GOLDEN / "sweep_three_signal.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(res.stdout)))
    assert [float(r["s_star"]) for r in rows] == pytest.approx([13.5, 13.5, 22.5, 22.5, 22.5])
    assert list(rows[0]) == list(cli.SWEEP_COLUMNS)


def test_sweep_marks_infeasible_transfers(runner, three_file):
    res = invoke(runner, "--out", "json", "sweep", "--scenario", three_file, "--pair", "1", "2",
                 "--alpha-max", "0.08", "--steps", "5")
    rows = json.loads(res.output)["rows"]
    assert rows[-1]["env"] == "invalid"
    assert all(r["env"] != "invalid" for r in rows[:-1])


def test_sweep_two_player(runner):
    res = invoke(runner, "--out", "json", "sweep", "--intro", "0.85", "0.3333333", "0.6", "--alpha-max", "0.2",
                 "--steps", "3")
    assert res.exit_code == 0
    assert len(json.loads(res.output)["rows"]) == 3


def test_sweep_needs_a_source(runner):
    res = runner.invoke(cli.main, ["sweep", "--alpha-max", "0.1"])
    assert res.exit_code != 0


def test_simulate(runner, three_file):
    res = invoke(runner, "--seed", "4", "simulate", "--scenario", three_file, "--sigma", '{"P1": [3], "P2": [3]}',
                 "--trials", "20000")
    data = json.loads(res.output)
    assert data["analytic"]["s"] == pytest.approx(13.5)
    assert abs(data["s_hat"] - 13.5) <= 4 * data["s_se"]
    again = invoke(runner, "--seed", "4", "simulate", "--scenario", three_file, "--sigma", '{"P1": [3], "P2": [3]}',
                   "--trials", "20000")
    assert again.output == res.output


def test_simulate_mixed_vectors(runner, three_file):
    res = invoke(runner, "simulate", "--scenario", three_file, "--sigma", "[[0, 0.5, 1], [0, 0.5, 1]]",
                 "--trials", "5000")
    assert "analytic" not in json.loads(res.output)


@pytest.mark.parametrize("name", ["intro", "b3-aggregation", "c-regions"])
def test_reproduce(runner, name):
    res = invoke(runner, "reproduce", name)
    assert res.exit_code == 0
    assert json.loads(res.output)["pass"] is True


def test_reproduce_three_signal(runner):
    res = invoke(runner, "reproduce", "b4-optimal", "--restarts", "0")
    data = json.loads(res.output)
    assert res.exit_code == 0 and data["pass"]
    assert data["s_star"] == pytest.approx(22.5)
    assert data["profile"] == [2, 3]


def test_reproduce_policymaker_certificate(runner):
    data = json.loads(invoke(runner, "reproduce", "b3-aggregation").output)
    assert data["theta_star"] == 28
    assert data["broken_ic_witness"]["signal"] == 1


def test_verify(runner):
    res = invoke(runner, "--out", "csv", "verify", "thm1", "--instances", "5")
    assert res.exit_code == 0
    row = next(csv.DictReader(io.StringIO(res.output)))
    assert row["passed"] == "5" and row["ok"] == "True"


def test_committee(runner, tmp_path):
    model = {"G": 3, "count_pmf": [0.25, 0.25, 0.25, 0.25], "prior": 0.5, "marginal0": 0.05, "cost": 0.36,
             "theta_bar": 1}
    less = dict(model, count_pmf=[0.2, 0.3, 0.3, 0.2])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps(model))
    b.write_text(json.dumps(less))
    res = invoke(runner, "committee", "--model", str(a), "--analyze", "--optimal-threshold", "--compare", str(b))
    data = json.loads(res.output)
    assert data["gamma"] == pytest.approx(list(gamma_from_counts(model["count_pmf"])))
    assert data["optimal_threshold"] == 2
    assert data["similarity_effect"]["verdict"] in ("preserved", "not_guaranteed")


def _run(monkeypatch, *args):
    monkeypatch.setattr(sys, "argv", ["cact", *args])
    with pytest.raises(SystemExit) as exc:
        cli.run()
    return exc.value.code


def test_exit_codes(monkeypatch, tmp_path, capsys):
    assert _run(monkeypatch, "reproduce", "nothing") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert _run(monkeypatch, "analyze", "--scenario", str(bad)) == 2
    assert "ParseError" in capsys.readouterr().err
    assert _run(monkeypatch, "verify", "no-such-suite") == 2
