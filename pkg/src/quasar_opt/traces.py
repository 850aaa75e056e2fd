"""Per-iteration run records and their CSV form.

Two schemas, fixed so downstream tooling can rely on the headers:

    run traces:      algo,seed,k,T_k,grad_calls,time_s,f_gap,dist
    recovery traces: algo,seed,k,T_k,pg_calls,dist

Floats are written with repr (shortest round-trip form), which makes
byte-identical reruns possible for everything except wall time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["RunTrace", "RecoveryTrace", "DivergenceError", "RUN_HEADER", "RECOVERY_HEADER"]

RUN_HEADER = ["algo", "seed", "k", "T_k", "grad_calls", "time_s", "f_gap", "dist"]
RECOVERY_HEADER = ["algo", "seed", "k", "T_k", "pg_calls", "dist"]


def _fmt(x) -> str:
    return repr(float(x))


@dataclass
class RunTrace:
    """Optimization trajectory of one run: value gap and cost per iteration."""

    algo: str
    seed: int
    ks: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)  # event time T_k (k for clockless methods)
    grad_calls: list[int] = field(default_factory=list)
    time_s: list[float] = field(default_factory=list)
    f_gap: list[float] = field(default_factory=list)
    dist: list[float] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    diverged: bool = False
    # only populated when an algorithm is asked to keep full iterates
    iterates_w: list[np.ndarray] = field(default_factory=list)
    iterates_z: list[np.ndarray] = field(default_factory=list)

    def append(self, k, t, grad_calls, wall, f_gap, dist) -> None:
        self.ks.append(int(k))
        self.times.append(float(t))
        self.grad_calls.append(int(grad_calls))
        self.time_s.append(float(wall))
        self.f_gap.append(float(f_gap))
        self.dist.append(float(dist))

    def __len__(self) -> int:
        return len(self.ks)

    def write_csv(self, path: str | Path, include_time: bool = True) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = RUN_HEADER if include_time else [c for c in RUN_HEADER if c != "time_s"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(len(self)):
                row = [
                    self.algo,
                    str(self.seed),
                    str(self.ks[i]),
                    _fmt(self.times[i]),
                    str(self.grad_calls[i]),
                ]
                if include_time:
                    row.append(_fmt(self.time_s[i]))
                row += [_fmt(self.f_gap[i]), _fmt(self.dist[i])]
                writer.writerow(row)
        return path


@dataclass
class RecoveryTrace:
    """Distance-to-target trajectory of one stochastic recovery run."""

    algo: str
    seed: int
    alpha: float
    ks: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    pg_calls: list[int] = field(default_factory=list)
    dist: list[float] = field(default_factory=list)
    diverged: bool = False
    iterates_w: list[np.ndarray] = field(default_factory=list)
    iterates_z: list[np.ndarray] = field(default_factory=list)

    def append(self, k, t, pg_calls, dist) -> None:
        self.ks.append(int(k))
        self.times.append(float(t))
        self.pg_calls.append(int(pg_calls))
        self.dist.append(float(dist))

    def __len__(self) -> int:
        return len(self.ks)

    def first_below(self, threshold: float) -> int | None:
        """Earliest iteration whose distance is at or below threshold."""
        for k, d in zip(self.ks, self.dist):
            if d <= threshold:
                return k
        return None

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RECOVERY_HEADER)
            for i in range(len(self)):
                writer.writerow(
                    [
                        self.algo,
                        str(self.seed),
                        str(self.ks[i]),
                        _fmt(self.times[i]),
                        str(self.pg_calls[i]),
                        _fmt(self.dist[i]),
                    ]
                )
        return path


class DivergenceError(RuntimeError):
    """An iterate left the finite range; carries the trace up to the abort."""

    def __init__(self, message: str, trace=None, last_state=None):
        super().__init__(message)
        self.trace = trace
        self.last_state = last_state
