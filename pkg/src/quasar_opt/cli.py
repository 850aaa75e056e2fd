"""Command line front end.

Subcommands:
    generate              write a synthetic problem (CSV + JSON sidecar)
    run                   one algorithm on one problem, trace to CSV
    grid                  the full sweep protocol into an output directory
    check                 certify a curvature condition, report as JSON
    verify-discretization compare the event recursion with the Euler oracle
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, certify
from .continuized import continuized_run, gd_run, quasar_params, strong_quasar_params
from .event_clock import SeededRng, build_schedule
from .glmtron import GlmtronParams, accel_glmtron_run, glmtron_run
from .hss import hss_agd_quasar, hss_agd_strong
from .links import make_link
from .objectives import (
    EvalCounter,
    empirical_objective,
    estimate_glm_constants,
    generate_problem,
    initial_point,
    load_problem,
    save_problem,
)
from .traces import DivergenceError

ALGO_CHOICES = sorted(bench.ALGORITHMS)


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a synthetic problem file")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--link", default="logistic",
                   choices=["identity", "logistic", "relu", "leaky_relu", "quadratic"])
    p.add_argument("--alpha", type=float, default=None, help="leaky_relu slope")
    p.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    p.add_argument("--out", required=True, help="CSV path; sidecar goes next to it")


def _add_run(sub):
    p = sub.add_parser("run", help="run one algorithm, write its trace CSV")
    p.add_argument("--problem", help="problem CSV from `generate`")
    p.add_argument("--n", type=int, default=1000, help="used when no --problem is given")
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--link", default="logistic",
                   choices=["identity", "logistic", "relu", "leaky_relu", "quadratic"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--algo", required=True, choices=ALGO_CHOICES)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _add_grid(sub):
    p = sub.add_parser("grid", help="full sweep from an experiment config file")
    p.add_argument("--config", required=True, help="key = value experiment file")
    p.add_argument("--out", required=True, help="output directory")


def _add_check(sub):
    p = sub.add_parser("check", help="certify a condition on sampled points")
    p.add_argument("--problem", required=True)
    p.add_argument("--property", required=True,
                   choices=["quasar", "strong-quasar", "one-point", "pl", "qg"])
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--cv", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--radius", type=float, default=None,
                   help="sampling radius around the generating vector "
                        "(default: 3x the start-to-target distance)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")


def _add_verify(sub):
    p = sub.add_parser("verify-discretization",
                       help="event recursion vs fine-Euler flow simulation")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--events", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)


def _cmd_generate(args) -> int:
    link = make_link(args.link, args.alpha)
    rng = SeededRng(args.seed, 0)
    problem = generate_problem(rng, args.n, args.d, link)
    sidecar = save_problem(problem, args.out, seed=args.seed)
    print(f"wrote {args.out} and {sidecar}")
    return 0


def _load_or_generate(args):
    if args.problem:
        return load_problem(args.problem)
    link = make_link(args.link, args.alpha)
    return generate_problem(SeededRng(args.seed, 0), args.n, args.d, link)


def _cmd_run(args) -> int:
    problem = _load_or_generate(args)
    obj = empirical_objective(problem)
    rng = SeededRng(args.seed, 1)
    w0 = initial_point(rng.spawn("w0"), problem.d)
    z0 = w0.copy()
    w_star = problem.w_star
    algo = args.algo

    needs_L = algo in {"gd", "continuized-quasar", "continuized-strong",
                       "hss-strong", "hss-quasar", "glmtron"}
    if needs_L and args.L is None:
        print("error: --L is required for this algorithm", file=sys.stderr)
        return 2
    needs_mu = algo in {"continuized-strong", "hss-strong"}
    if needs_mu and args.mu is None:
        print("error: --mu is required for this algorithm", file=sys.stderr)
        return 2

    try:
        if algo == "gd":
            trace = gd_run(obj, w0, 1.0 / args.L, args.iters, w_star=w_star, seed=args.seed)
        elif algo == "continuized-quasar":
            sched = build_schedule(rng.spawn("clock"), args.iters)
            trace = continuized_run(obj, w0, z0, sched, quasar_params(args.rho, args.L),
                                    args.iters, w_star=w_star, algo=algo, seed=args.seed)
        elif algo == "continuized-strong":
            sched = build_schedule(rng.spawn("clock"), args.iters)
            trace = continuized_run(obj, w0, z0, sched,
                                    strong_quasar_params(args.rho, args.mu, args.L),
                                    args.iters, w_star=w_star, algo=algo, seed=args.seed)
        elif algo == "hss-strong":
            trace = hss_agd_strong(obj, w0, z0, args.rho, args.mu, args.L, args.iters,
                                   counter=EvalCounter(), w_star=w_star, seed=args.seed)
        elif algo == "hss-quasar":
            trace = hss_agd_quasar(obj, w0, z0, args.rho, args.L, args.eps, args.iters,
                                   counter=EvalCounter(), w_star=w_star, seed=args.seed)
        elif algo == "glmtron":
            trace = glmtron_run(problem, w0, 1.0 / args.L, args.iters,
                                rng.spawn("samples"), seed=args.seed)
        elif algo == "accel-glmtron":
            if args.mu is not None and args.r2 is not None and args.kappa is not None:
                params = GlmtronParams(mu=args.mu, R2=args.r2, kappa_tilde=args.kappa)
            else:
                mu_hat, r2_hat, kap_hat = estimate_glm_constants(
                    problem, 10 * problem.n, rng.spawn("constants"), w=w0)
                params = GlmtronParams(mu=mu_hat, R2=r2_hat, kappa_tilde=kap_hat)
            sched = build_schedule(rng.spawn("clock"), args.iters)
            trace = accel_glmtron_run(problem, w0, z0, params, sched, args.iters,
                                      rng.spawn("samples"), seed=args.seed)
        else:
            raise ValueError(algo)
    except DivergenceError as err:
        if err.trace is not None:
            err.trace.write_csv(args.out)
        print(f"diverged: {err}", file=sys.stderr)
        return 1
    trace.write_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_grid(args) -> int:
    cfg = bench.parse_config(args.config)
    manifest = bench.run_grid(cfg, args.out)
    print(json.dumps(manifest, indent=2))
    return 0


def _cmd_check(args) -> int:
    problem = load_problem(args.problem)
    obj = empirical_objective(problem)
    rng = SeededRng(args.seed, 2)
    w0 = initial_point(rng.spawn("w0"), problem.d)
    radius = args.radius
    if radius is None:
        radius = 3.0 * float(np.linalg.norm(w0 - problem.w_star))
    points = certify.sample_ball(rng.spawn("points"), problem.w_star, radius, args.points)

    def require(name, value):
        if value is None:
            print(f"error: --{name} is required for this property", file=sys.stderr)
            raise SystemExit(2)
        return value

    prop = args.property
    if prop == "quasar":
        report = certify.check_quasar(obj, problem.w_star, require("rho", args.rho),
                                      points, args.tol)
    elif prop == "strong-quasar":
        report = certify.check_strong_quasar(obj, problem.w_star, require("rho", args.rho),
                                             require("mu", args.mu), points, args.tol)
    elif prop == "one-point":
        report = certify.check_one_point_convex(obj, problem.w_star, require("cv", args.cv),
                                                points, args.tol)
    elif prop == "pl":
        report = certify.check_pl(obj, float(obj.f(problem.w_star)),
                                  require("nu", args.nu), points, args.tol)
    else:
        report = certify.check_qg(obj, problem.w_star, require("nu", args.nu),
                                  points, args.tol)

    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.holds else 1


def _cmd_verify(args) -> int:
    report = bench.verify_discretization(seed=args.seed, k_events=args.events, dt=args.dt)
    print(json.dumps(report, indent=2))
    ok = report["max_rel_error"] <= 1e-3
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasar-opt",
        description="randomized momentum optimizers, certification and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_run(sub)
    _add_grid(sub)
    _add_check(sub)
    _add_verify(sub)
    args = parser.parse_args(argv)
    return {
        "generate": _cmd_generate,
        "run": _cmd_run,
        "grid": _cmd_grid,
        "check": _cmd_check,
        "verify-discretization": _cmd_verify,
    }[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
