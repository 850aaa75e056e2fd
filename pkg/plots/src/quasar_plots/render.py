"""Line plots over benchmark trace CSVs.

Input files carry an `algo` column, a `seed` column, one column per axis
selector and the metric columns. One line is drawn per algorithm; when an
algorithm has rows under several seeds, the line is the per-x mean and an
optional min/max band shows the spread.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

X_CHOICES = ("iteration", "grad_calls", "time_s")
Y_CHOICES = ("f_gap", "dist")


class SchemaError(ValueError):
    """A required column is missing from an input CSV."""


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: tuple[str, ...]
    x: str = "iteration"
    y: str = "f_gap"
    log_y: bool = True
    out: str | None = None
    bands: bool = True
    title: str | None = None

    def __post_init__(self) -> None:
        if self.x not in X_CHOICES:
            raise ValueError(f"x selector must be one of {X_CHOICES}, got {self.x!r}")
        if self.y not in Y_CHOICES:
            raise ValueError(f"y selector must be one of {Y_CHOICES}, got {self.y!r}")
        if not self.csv_paths:
            raise ValueError("need at least one input CSV")


def read_series(path: str | Path, x: str, y: str) -> dict[str, dict[str, list[tuple[float, float]]]]:
    """Rows of one CSV grouped as {algo: {seed: [(x, y), ...]}}.

    Raises SchemaError naming the first selector column the file lacks.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path} is empty")
        for column in ("algo", x, y):
            if column not in header:
                raise SchemaError(f"{path} has no column {column!r}")
        idx = {name: header.index(name) for name in header}
        out: dict[str, dict[str, list[tuple[float, float]]]] = defaultdict(
            lambda: defaultdict(list)
        )
        for row in reader:
            if not row:
                continue
            algo = row[idx["algo"]]
            seed = row[idx["seed"]] if "seed" in idx else "0"
            out[algo][seed].append((float(row[idx[x]]), float(row[idx[y]])))
    return {a: dict(s) for a, s in out.items()}


def _merge(paths, x, y):
    merged: dict[str, dict[str, list[tuple[float, float]]]] = defaultdict(dict)
    for path in paths:
        for algo, per_seed in read_series(path, x, y).items():
            for seed, rows in per_seed.items():
                merged[algo].setdefault(seed, []).extend(rows)
    return merged


def render(spec: PlotSpec):
    """Draw the comparison figure; write it when an output path is set.

    Returns the matplotlib Figure so callers can inspect the drawn data.
    """
    data = _merge(spec.csv_paths, spec.x, spec.y)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for algo in sorted(data):
        per_seed = data[algo]
        if len(per_seed) == 1:
            rows = next(iter(per_seed.values()))
            xs = np.array([r[0] for r in rows])
            ys = np.array([r[1] for r in rows])
            ax.plot(xs, ys, label=algo, marker="" if xs.size > 1 else "o")
        else:
            # several seeds: mean line over the common x grid, min/max band
            by_x: dict[float, list[float]] = defaultdict(list)
            for rows in per_seed.values():
                for xv, yv in rows:
                    by_x[xv].append(yv)
            xs = np.array(sorted(by_x))
            mean = np.array([np.mean(by_x[xv]) for xv in xs])
            ax.plot(xs, mean, label=algo, marker="" if xs.size > 1 else "o")
            if spec.bands:
                lo = np.array([min(by_x[xv]) for xv in xs])
                hi = np.array([max(by_x[xv]) for xv in xs])
                ax.fill_between(xs, lo, hi, alpha=0.2)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x)
    ax.set_ylabel(spec.y)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    if spec.out:
        out = Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    return fig
