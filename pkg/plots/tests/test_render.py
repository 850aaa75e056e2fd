import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from quasar_plots import PlotSpec, SchemaError, render
from quasar_plots.cli import main as cli_main


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


HEADER = ["algo", "seed", "iteration", "f_gap", "dist"]


class TestRoundTrip:
    def test_figure_reproduces_input_values_exactly(self, tmp_path):
        xs = [0.0, 1.0, 2.0, 3.0]
        ys = [1.5, 0.25, 0.0625, 0.015625]
        path = tmp_path / "one.csv"
        write_csv(path, HEADER, [["gd", "0", x, y, 0.1] for x, y in zip(xs, ys)])
        fig = render(PlotSpec(csv_paths=(str(path),), x="iteration", y="f_gap"))
        (line,) = fig.axes[0].get_lines()
        assert list(line.get_xdata()) == xs
        assert list(line.get_ydata()) == ys

    def test_one_line_per_algorithm_with_legend(self, tmp_path):
        paths = []
        for i, algo in enumerate(["gd", "momentum", "baseline"]):
            p = tmp_path / f"{algo}.csv"
            write_csv(p, HEADER, [[algo, "0", 0.0, 1.0 + i, 0.0]])
            paths.append(str(p))
        out = tmp_path / "fig.png"
        fig = render(PlotSpec(csv_paths=tuple(paths), out=str(out)))
        assert out.exists()
        labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
        assert labels == ["baseline", "gd", "momentum"]
        assert len(fig.axes[0].get_lines()) == 3

    def test_multi_seed_rows_get_mean_line_and_band(self, tmp_path):
        path = tmp_path / "multi.csv"
        rows = [
            ["sgd", "0", 0.0, 1.0, 0.0],
            ["sgd", "0", 1.0, 0.5, 0.0],
            ["sgd", "1", 0.0, 3.0, 0.0],
            ["sgd", "1", 1.0, 1.5, 0.0],
        ]
        write_csv(path, HEADER, rows)
        fig = render(PlotSpec(csv_paths=(str(path),)))
        (line,) = fig.axes[0].get_lines()
        np.testing.assert_allclose(line.get_ydata(), [2.0, 1.0])
        assert len(fig.axes[0].collections) == 1  # the band


class TestSchemaErrors:
    def test_missing_metric_column_is_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["algo", "seed", "iteration", "dist"], [["gd", "0", 0.0, 1.0]])
        with pytest.raises(SchemaError, match="f_gap"):
            render(PlotSpec(csv_paths=(str(path),), y="f_gap"))

    def test_missing_axis_column_is_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["algo", "seed", "iteration", "f_gap"], [["gd", "0", 0.0, 1.0]])
        with pytest.raises(SchemaError, match="time_s"):
            render(PlotSpec(csv_paths=(str(path),), x="time_s"))

    def test_invalid_selector_rejected_up_front(self):
        with pytest.raises(ValueError):
            PlotSpec(csv_paths=("x.csv",), x="wall_time")


class TestCli:
    def test_writes_image_and_reports(self, tmp_path, capsys):
        path = tmp_path / "t.csv"
        write_csv(path, HEADER, [["gd", "0", k, 2.0 ** -k, 0.0] for k in range(5)])
        out = tmp_path / "out.svg"
        code = cli_main([str(path), "--out", str(out), "--y", "f_gap"])
        assert code == 0
        assert out.exists()

    def test_schema_error_exit_code(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["algo", "seed", "iteration", "dist"], [["gd", "0", 0, 1.0]])
        code = cli_main([str(path), "--out", str(tmp_path / "o.png")])
        assert code == 2


@pytest.fixture(scope="module")
def harness_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("harness")
    cfg = root / "exp.cfg"
    cfg.write_text(
        "link = identity\nn = 30\nd = 3\n"
        "algorithms = gd, continuized-strong\n"
        "iters = 25\nruns = 2\nseed = 5\nq_lo = 0\nq_hi = 0\nrho_set = 0.5\n"
    )
    out = root / "results"
    subprocess.run(
        [sys.executable, "-m", "quasar_opt.cli", "grid",
         "--config", str(cfg), "--out", str(out)],
        check=True, capture_output=True,
    )
    return out


class TestHarnessIntegration:
    """Render straight from a sweep output directory produced by the
    optimizer package's command line (its external interface)."""

    def test_three_axis_variants_render_without_error(self, harness_dir, tmp_path):
        manifest = json.loads((harness_dir / "manifest.json").read_text())
        all_files = manifest["deterministic"] + manifest["informational"]
        for axis in ("iteration", "grad_calls", "time_s"):
            inputs = [
                str(harness_dir / rel)
                for rel in all_files
                if rel.endswith(f"__{axis}.csv")
            ]
            assert inputs, f"no {axis} extracts in the sweep output"
            out = tmp_path / f"fig_{axis}.png"
            fig = render(
                PlotSpec(csv_paths=tuple(sorted(inputs)), x=axis, y="f_gap",
                         out=str(out))
            )
            assert out.exists()
            assert len(fig.axes[0].get_lines()) == 2

    def test_distance_axis_renders_from_trace_schema(self, harness_dir, tmp_path):
        inputs = sorted(
            str(p) for p in (harness_dir / "plot_data").glob("*__iteration.csv")
        )
        out = tmp_path / "dist.png"
        render(PlotSpec(csv_paths=tuple(inputs), x="iteration", y="dist", out=str(out)))
        assert out.exists()
