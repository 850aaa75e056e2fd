import csv
import json

import numpy as np
import pytest

from quasar_opt.cli import main
from quasar_opt.objectives import load_problem
from quasar_opt.traces import RUN_HEADER


def run_cli(*args):
    return main(list(args))


class TestGenerate:
    def test_writes_problem_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        code = run_cli(
            "generate", "--n", "20", "--d", "3", "--link", "leaky_relu",
            "--alpha", "0.5", "--seed", "9", "--out", str(out),
        )
        assert code == 0
        problem = load_problem(out)
        assert problem.X.shape == (20, 3)
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["link"] == "leaky_relu"
        assert meta["seed"] == 9

    def test_same_seed_is_reproducible(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("generate", "--n", "10", "--d", "2", "--link", "identity",
                "--seed", "4", "--out", str(a))
        run_cli("generate", "--n", "10", "--d", "2", "--link", "identity",
                "--seed", "4", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestRun:
    @pytest.fixture()
    def problem_file(self, tmp_path):
        out = tmp_path / "prob.csv"
        run_cli("generate", "--n", "30", "--d", "3", "--link", "identity",
                "--seed", "2", "--out", str(out))
        return out

    @pytest.mark.parametrize(
        "algo,extra",
        [
            ("gd", ["--L", "2"]),
            ("continuized-quasar", ["--L", "2", "--rho", "1.0"]),
            ("continuized-strong", ["--L", "2", "--mu", "0.1", "--rho", "0.5"]),
            ("hss-strong", ["--L", "2", "--mu", "0.1", "--rho", "0.5"]),
            ("hss-quasar", ["--L", "2", "--rho", "0.5"]),
            ("glmtron", ["--L", "2"]),
            ("accel-glmtron", []),
        ],
    )
    def test_each_algorithm_writes_schema_csv(self, problem_file, tmp_path, algo, extra):
        out = tmp_path / f"{algo}.csv"
        code = run_cli(
            "run", "--problem", str(problem_file), "--algo", algo,
            "--iters", "20", "--seed", "1", "--out", str(out), *extra,
        )
        assert code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        if algo in ("glmtron", "accel-glmtron"):
            assert rows[0] == ["algo", "seed", "k", "T_k", "pg_calls", "dist"]
        else:
            assert rows[0] == RUN_HEADER
        assert len(rows) == 22  # header + initial row + 20 iterations

    def test_missing_constant_is_an_error(self, problem_file, tmp_path):
        code = run_cli(
            "run", "--problem", str(problem_file), "--algo", "gd",
            "--iters", "5", "--out", str(tmp_path / "x.csv"),
        )
        assert code == 2


class TestCheck:
    def test_quasar_report_to_stdout(self, tmp_path, capsys):
        prob = tmp_path / "p.csv"
        run_cli("generate", "--n", "200", "--d", "4", "--link", "leaky_relu",
                "--alpha", "0.5", "--seed", "5", "--out", str(prob))
        capsys.readouterr()
        code = run_cli(
            "check", "--problem", str(prob), "--property", "quasar",
            "--rho", "0.5", "--points", "200", "--seed", "3",
        )
        report = json.loads(capsys.readouterr().out)
        assert code == 0
        assert report["holds"] is True
        assert report["property"] == "quasar"
        assert report["points_tested"] == 200

    def test_failing_certificate_sets_exit_code(self, tmp_path, capsys):
        prob = tmp_path / "p.csv"
        run_cli("generate", "--n", "100", "--d", "3", "--link", "identity",
                "--seed", "6", "--out", str(prob))
        capsys.readouterr()
        code = run_cli(
            "check", "--problem", str(prob), "--property", "quasar",
            "--rho", "5.0", "--points", "100",
        )
        assert code == 1
        assert json.loads(capsys.readouterr().out)["holds"] is False

    def test_report_file_output(self, tmp_path):
        prob = tmp_path / "p.csv"
        run_cli("generate", "--n", "100", "--d", "3", "--link", "identity",
                "--seed", "6", "--out", str(prob))
        report_path = tmp_path / "report.json"
        run_cli(
            "check", "--problem", str(prob), "--property", "qg",
            "--nu", "0.1", "--points", "100", "--out", str(report_path),
        )
        assert json.loads(report_path.read_text())["property"] == "qg"


class TestGridAndVerify:
    def test_grid_subcommand_end_to_end(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "link = identity\nn = 25\nd = 2\nalgorithms = gd\n"
            "iters = 15\nruns = 1\nseed = 3\nq_lo = 0\nq_hi = 0\nrho_set = 0.5\n"
        )
        out_dir = tmp_path / "results"
        code = run_cli("grid", "--config", str(cfg), "--out", str(out_dir))
        assert code == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        for rel in manifest["deterministic"]:
            assert (out_dir / rel).exists()

    def test_verify_subcommand_reports_small_error(self, capsys):
        code = run_cli("verify-discretization", "--dt", "1e-3", "--events", "8")
        report = json.loads(capsys.readouterr().out)
        assert code == 0
        assert report["max_rel_error"] <= 1e-3
