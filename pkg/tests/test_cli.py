import csv
import io

import numpy as np
import pytest

from imbandit import random_graph
from imbandit.cli import CSV_COLUMNS, main
from imbandit.graph import dump_edge_list


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("g") / "graph.txt"
    path.write_text(dump_edge_list(random_graph(40, 2.5, random_state=0)), encoding="utf-8")
    return path


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


BASE = ["--algo", "eg", "--feedback", "el", "--k", "3", "--oracle", "rr:1000"]


class TestRun:
    def test_rows_and_header(self, graph_file, tmp_path, capsys):
        out = tmp_path / "o.csv"
        code, _, _ = run_cli(["run", "--graph", graph_file, *BASE, "--rounds", 10, "--seeds", 3, "--out", out], capsys)
        assert code == 0
        rows = read_rows(out)
        assert rows[0] == CSV_COLUMNS
        assert rows[0] == (
            "seed,round,algo,feedback,k,spread_learned,spread_true,regret,cum_avg_regret,l2_rel_error,frac_within_10"
        ).split(",")
        data = [r for r in rows[1:] if r[0] != "mean"]
        summary = [r for r in rows[1:] if r[0] == "mean"]
        assert len(data) == 30 and len(summary) == 10
        assert [r[0] for r in data] == [str(i) for i in range(3) for _ in range(10)]
        assert [int(r[1]) for r in summary] == list(range(1, 11))

    def test_summary_is_mean_of_data(self, graph_file, tmp_path, capsys):
        out = tmp_path / "o.csv"
        run_cli(["run", "--graph", graph_file, *BASE, "--rounds", 8, "--seeds", 3, "--out", out], capsys)
        rows = read_rows(out)
        data = [r for r in rows[1:] if r[0] != "mean"]
        summary = [r for r in rows[1:] if r[0] == "mean"]
        for s, row in enumerate(summary, start=1):
            group = [r for r in data if int(r[1]) == s]
            for col in range(5, len(CSV_COLUMNS)):
                mean = sum(float(r[col]) for r in group) / len(group)
                assert float(row[col]) == pytest.approx(mean, rel=1e-8)

    def test_cumulative_average(self, graph_file, tmp_path, capsys):
        out = tmp_path / "o.csv"
        run_cli(["run", "--graph", graph_file, *BASE, "--rounds", 12, "--out", out], capsys)
        data = [r for r in read_rows(out)[1:] if r[0] == "0"]
        regret = np.array([float(r[7]) for r in data])
        cum = np.array([float(r[8]) for r in data])
        assert np.allclose(cum, np.cumsum(regret) / np.arange(1, 13))

    def test_byte_identical_rerun(self, graph_file, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["run", "--graph", graph_file, "--algo", "se", "--feedback", "nlf", "--k", 2, "--rounds", 6,
                "--seeds", 2, "--oracle", "greedy:30", "--mc-sims", 30, "--master-seed", 11]
        run_cli([*args, "--out", a], capsys)
        run_cli([*args, "--out", b, "--jobs", 2], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_and_roc(self, graph_file, capsys):
        code, out, _ = run_cli(["run", "--graph", graph_file, *BASE, "--rounds", 2, "--roc"], capsys)
        assert code == 0
        header = next(csv.reader(io.StringIO(out)))
        assert header[: len(CSV_COLUMNS)] == CSV_COLUMNS
        assert header[len(CSV_COLUMNS):] == [f"frac_within_{p}" for p in (5, 15, 20, 25, 30, 35, 40, 45, 50)]

    @pytest.mark.parametrize("assign", ["const:0.2", "file"])
    def test_assignments(self, graph_file, capsys, assign):
        code, out, _ = run_cli(["run", "--graph", graph_file, "--assign", assign, *BASE, "--rounds", 2], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        # file probabilities are all 0 here, so the error metric is undefined
        l2 = float(rows[1][9])
        assert np.isnan(l2) if assign == "file" else 0.0 <= l2

    def test_unknown_algo(self, graph_file, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--graph", str(graph_file), "--algo", "ts"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "extra",
        [["--k", "0"], ["--k", "500"], ["--prior", "1"], ["--oracle", "tim"], ["--zeta", "2"], ["--assign", "const:2"], ["--seeds", "0"]],
    )
    def test_invalid_config(self, graph_file, capsys, extra):
        code, _, err = run_cli(["run", "--graph", graph_file, "--rounds", 2, *extra], capsys)
        assert code == 2
        assert "invalid configuration" in err

    def test_malformed_graph(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("0 1\n0 x\n", encoding="utf-8")
        code, _, err = run_cli(["run", "--graph", bad, "--rounds", 2], capsys)
        assert code == 2 and "line 2" in err

    def test_missing_graph(self, tmp_path, capsys):
        code, _, _ = run_cli(["run", "--graph", tmp_path / "nope.txt"], capsys)
        assert code == 1

    def test_unwritable_output(self, graph_file, tmp_path, capsys):
        code, _, _ = run_cli(["run", "--graph", graph_file, *BASE, "--rounds", 2, "--out", tmp_path / "no" / "x.csv"], capsys)
        assert code == 1


class TestBounds:
    def test_failure_prob(self, capsys):
        code, out, _ = run_cli(["bounds", "failure-prob", "--k", 2, "--pmin", 0, "--pmax", 0.2], capsys)
        assert code == 0 and out.strip() == "0.2"

    def test_sample_complexity(self, capsys):
        # delta = 0.367879 sits just below 1/e, which pushes the ceiling to 5001
        code, out, _ = run_cli(
            ["bounds", "sample-complexity", "--gamma", 0.5, "--nodes", 100, "--k", 10,
             "--delta", 0.367879, "--eps", 0.1, "--pstar", 0.3], capsys)
        assert code == 0 and out.strip() == "5001"
        code, out, _ = run_cli(
            ["bounds", "sample-complexity", "--gamma", 0.5, "--nodes", 100, "--k", 10,
             "--delta", repr(float(np.exp(-1))), "--eps", 0.1, "--pstar", 0.3], capsys)
        assert out.strip() == "5000"

    def test_mle_gap(self, capsys):
        code, out, _ = run_cli(["bounds", "mle-gap", "--dv", 2, "--thetamax", 1, "--T", 4, "--G", 1], capsys)
        assert code == 0 and out.strip() == "3.5"

    def test_precondition_violation(self, capsys):
        code, _, _ = run_cli(["bounds", "failure-prob", "--k", 2, "--pmin", 0.5, "--pmax", 0.2], capsys)
        assert code == 2
        code, _, _ = run_cli(["bounds", "sample-complexity", "--gamma", 0, "--nodes", 100, "--k", 10,
                              "--delta", 0.1, "--eps", 0.1, "--pstar", 0.3], capsys)
        assert code == 2


def test_verify_sample_complexity(graph_file, capsys):
    code, out, _ = run_cli(
        ["verify-sample-complexity", "--graph", graph_file, "--k", 5, "--eps", 0.5, "--delta", 0.5, "--reps", 5], capsys
    )
    lines = out.splitlines()
    assert lines[0] == "gamma 0.5"
    assert lines[2].startswith("cascades ")
    assert code in (0, 3)
