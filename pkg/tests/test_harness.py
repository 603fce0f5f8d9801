import csv
import io
import math

import pytest

from dynlpa.errors import ExpressionError, ParameterError
from dynlpa.harness import cli
from dynlpa.harness.config import (
    MULTI_SOURCE_C,
    ExperimentConfig,
    build,
    coerce,
    default_c_grid,
    load_config_file,
    table_presets,
)
from dynlpa.harness.expr import UniformRange, evaluate, parse_prob_expr
from dynlpa.harness.runner import SUMMARY_HEADER, TRIAL_HEADER, run_experiment, trial_seed, write_summary


class TestExpr:
    @pytest.mark.parametrize("text,n,want", [
        ("5/n", 20000, 0.00025),
        ("n^-1.5", 10**4, 1e-6),
        ("n^(-5/3)", 1000, 1e-5),
        ("1/(4n)", 100, 0.0025),
        ("log n / n", 100, math.log(100) / 100),
        ("2 log(n)/n", 100, 2 * math.log(100) / 100),
        ("0", 7, 0.0),
    ])
    def test_values(self, text, n, want):
        assert parse_prob_expr(text, n) == pytest.approx(want, rel=1e-12)

    def test_uniform(self):
        r = parse_prob_expr("uniform(1/n,9/n)", 1000)
        assert r == UniformRange(0.001, 0.009)

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            parse_prob_expr("5", 100)

    @pytest.mark.parametrize("text,pos", [("5/", 2), ("5/n)", 3), ("n^", 2), ("", 0), ("foo", 0)])
    def test_error_position(self, text, pos):
        with pytest.raises(ExpressionError) as err:
            evaluate(text, 10)
        assert err.value.position == pos


class TestConfig:
    def test_invariants(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(trials=0)
        with pytest.raises(ParameterError):
            ExperimentConfig(variant="x")

    def test_table1_grid(self):
        grid = table_presets("table1")
        assert len(grid) == 24
        assert {c.p for c in grid} == {"5/n"}
        assert [c.c for c in grid[:3]] == [0.9, 0.6, 0.5]

    def test_table3_first_column(self):
        assert table_presets("table3")[0].c == 1.0

    def test_max_n(self):
        assert {c.n for c in table_presets("table2", max_n=40000)} == {20000, 40000}

    def test_unknown_table(self):
        with pytest.raises(ParameterError):
            table_presets("table9")

    def test_build_models(self):
        assert build(ExperimentConfig(p="uniform(1/n,9/n)")).model_label == "nonhomogeneous"
        b = build(ExperimentConfig(model="meg", p="0.001", q="0.0001"))
        assert b.model_label == "meg" and b.schedule.gap > 0
        b = build(ExperimentConfig(variant="multi-source", c=MULTI_SOURCE_C))
        assert b.schedule.window_count == 4

    def test_build_sparse(self):
        b = build(ExperimentConfig(n=5000, p="1/(4n)", sparse=True))
        assert b.schedule.delta == 4

    def test_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# comment\nn = 3000\np = 6/n\nc = 0.5,0.5,0.5,0.2,1\nsparse = yes\n", encoding="utf-8")
        values = load_config_file(path)
        assert values == {"n": 3000, "p": "6/n", "c": (0.5, 0.5, 0.5, 0.2, 1.0), "sparse": True}

    def test_file_errors(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("nonsense\n", encoding="utf-8")
        with pytest.raises(ParameterError):
            load_config_file(path)
        with pytest.raises(ParameterError):
            coerce("colour", "red")
        with pytest.raises(ParameterError):
            coerce("n", "many")

    def test_c_grid(self):
        grid = default_c_grid()
        assert grid[0] == 0.1 and grid[-1] == 2.0 and len(grid) == 20


class TestRunner:
    def test_trial_seeds_distinct(self):
        seeds = {trial_seed(0, t) for t in range(1000)}
        assert len(seeds) == 1000

    def test_replay_and_csv(self, tmp_path):
        cfg = ExperimentConfig(n=2000, trials=6, seed=3, workers=2, out=str(tmp_path / "s.csv"))
        a, recs = run_experiment(cfg)
        b, _ = run_experiment(ExperimentConfig(n=2000, trials=6, seed=3, workers=1))
        assert a.row() == b.row()
        rows = list(csv.reader(open(tmp_path / "s_000_n2000_trials.csv")))
        assert rows[0] == TRIAL_HEADER
        assert [int(r[0]) for r in rows[1:]] == list(range(6))
        assert sum(int(r[2]) for r in rows[1:]) == a.successes
        assert all(int(r[3]) == a.total_rounds for r in rows[1:])

    def test_q_zero_single_trial(self):
        cfg = ExperimentConfig(n=2000, q="0", trials=1, seed=5, trajectories=True)
        s1, r1 = run_experiment(cfg)
        s2, _ = run_experiment(cfg)
        assert s1 == s2
        k = r1[0].trajectory.k[-1]
        assert r1[0].success == (list(k) == [1000, 1000])

    def test_summary_writer(self):
        buf = io.StringIO()
        s, _ = run_experiment(ExperimentConfig(n=1000, trials=2, workers=1))
        write_summary([s], stream=buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",".join(SUMMARY_HEADER)
        assert lines[1].startswith("1000,bernoulli,5/n,n^-2,two-source,0.5,2,")


class TestCli:
    def test_run(self, capsys, tmp_path):
        out = tmp_path / "run.csv"
        code = cli.main(["run", "--n", "1000", "--trials", "3", "--workers", "1", "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out.splitlines()
        assert printed[0] == ",".join(SUMMARY_HEADER)
        assert out.read_text().splitlines() == printed

    def test_config_file_and_override(self, capsys, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n = 1000\ntrials = 2\nseed = 9\nworkers = 1\n", encoding="utf-8")
        assert cli.main(["run", "--config", str(path), "--seed", "4"]) == 0
        row = capsys.readouterr().out.splitlines()[1].split(",")
        assert row[0] == "1000" and row[-1] == "4"

    def test_table_max_n(self, capsys):
        assert cli.main(["table1", "--max-n", "100", "--trials", "1"]) == 0
        assert capsys.readouterr().out.strip() == ",".join(SUMMARY_HEADER)

    def test_parameter_error(self, capsys):
        assert cli.main(["run", "--p", "5/", "--trials", "1"]) == 1
        assert "position 2" in capsys.readouterr().err

    def test_io_error(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code = cli.main(["run", "--n", "500", "--trials", "1", "--out", str(blocker / "sub" / "s.csv")])
        assert code == 2
        assert str(blocker) in capsys.readouterr().err

    def test_invariant_exit(self, monkeypatch, capsys):
        from dynlpa.errors import InvariantViolation

        def broken(*a, **k):
            raise InvariantViolation("boom")

        monkeypatch.setattr(cli, "run_experiment", broken)
        assert cli.main(["run", "--n", "500", "--trials", "1"]) == 3

    def test_multi_source_default_c(self, capsys):
        assert cli.main(["run", "--n", "1000", "--trials", "1", "--variant", "multi-source", "--workers", "1"]) == 0
        row = capsys.readouterr().out.splitlines()[1].split(",")
        assert row[5] == "0.5/0.5/0.5/0.2/1"

    def test_meg(self, capsys):
        assert cli.main(["meg", "--n", "1000", "--p", "0.005", "--q", "0.00001", "--trials", "1", "--workers", "1"]) == 0
        captured = capsys.readouterr()
        assert ",meg," in captured.out
        assert "stationary" in captured.err

    def test_hidden_oracle(self, capsys):
        assert cli.main(["oracle", "linkproc", "--pair-rounds", "10000"]) == 0
        assert capsys.readouterr().out.startswith("direction,")
        assert "oracle" not in cli.make_parser().format_help()

    def test_tune_c(self, capsys):
        assert cli.main(["run", "--n", "1000", "--trials", "2", "--workers", "1", "--tune-c"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 2
