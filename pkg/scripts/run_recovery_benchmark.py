#!/usr/bin/env python3
"""Recovery comparison: plain vs momentum pseudo-gradient methods.

For each leaky-relu slope, tunes the plain method's step over the decade
grid, runs both methods for --runs independent streams, and writes one
trace CSV per (method, run) plus a medians summary. The momentum method
uses moment constants estimated at the start point.

Example:
    python scripts/run_recovery_benchmark.py --alphas 0.01 0.1 0.5 --out rec/
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from quasar_opt.bench import stream_for
from quasar_opt.event_clock import SeededRng, build_schedule
from quasar_opt.glmtron import GlmtronParams, accel_glmtron_run, glmtron_run
from quasar_opt.links import leaky_relu_link
from quasar_opt.objectives import (
    estimate_glm_constants,
    generate_problem,
    initial_point,
)
from quasar_opt.traces import DivergenceError


def tune_step(problem, w0, seed, tune_iters=2000, tune_runs=3):
    steps = sorted(1.0 / (10.0**q * m) for q in range(-2, 5) for m in (1.0, 5.0))
    best_step, best_score = None, math.inf
    for i_s, step in enumerate(steps):
        finals = []
        for r in range(tune_runs):
            try:
                tr = glmtron_run(problem, w0, step, tune_iters,
                                 SeededRng(seed, 100 + 17 * i_s + r))
                finals.append(tr.dist[-1])
            except DivergenceError:
                finals.append(math.inf)
        score = float(np.median(finals))
        if score < best_score:
            best_score, best_step = score, step
    return best_step


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", nargs="+", type=float, default=[0.01, 0.1, 0.5])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--d", type=int, default=50)
    parser.add_argument("--iters", type=int, default=10000)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=2025)
    parser.add_argument("--threshold", type=float, default=1e-3)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for alpha in args.alphas:
        problem = generate_problem(
            SeededRng(args.seed, 0), args.n, args.d, leaky_relu_link(alpha)
        )
        w0 = initial_point(SeededRng(args.seed, 1), args.d)
        step = tune_step(problem, w0, args.seed)
        mu, r2, kappa = estimate_glm_constants(
            problem, 10 * problem.n, SeededRng(args.seed, 3), w=w0
        )
        params = GlmtronParams(mu=mu, R2=r2, kappa_tilde=kappa)

        hits = {"glmtron": [], "accel-glmtron": []}
        for r in range(args.runs):
            tr = glmtron_run(problem, w0, step, args.iters, SeededRng(args.seed, 1000 + r),
                             seed=r)
            tr.write_csv(out / f"glmtron_a{alpha}_run{r}.csv")
            k = tr.first_below(args.threshold)
            hits["glmtron"].append(k if k is not None else args.iters + 1)

            rng = SeededRng(args.seed, 2000 + r)
            sched = build_schedule(rng, args.iters)
            ta = accel_glmtron_run(problem, w0, w0.copy(), params, sched,
                                   args.iters, rng, seed=r)
            ta.write_csv(out / f"accel-glmtron_a{alpha}_run{r}.csv")
            k = ta.first_below(args.threshold)
            hits["accel-glmtron"].append(k if k is not None else args.iters + 1)

        summary[str(alpha)] = {
            "tuned_step": step,
            "constants": {"mu": mu, "R2": r2, "kappa_tilde": kappa},
            "median_iters_to_threshold": {
                name: float(np.median(v)) for name, v in hits.items()
            },
        }
        print(f"alpha={alpha}: medians "
              f"{summary[str(alpha)]['median_iters_to_threshold']}")

    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {out}/summary.json")


if __name__ == "__main__":
    main()
