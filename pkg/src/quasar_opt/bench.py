"""End-to-end benchmark protocol: problems, grid search, multi-run averages.

The sweep generates one synthetic problem per configuration, tunes each
algorithm over a log-spaced grid of curvature constants (candidates
{10^q, 5*10^q} per decade, pairs restricted to L > mu, a small set of
curvature ratios rho), replicates stochastic methods over several
clock streams, scores every tuple by the final run-averaged gap, and
emits the best trace per algorithm as CSV along with the full score
table and a manifest.

Wall time is recorded but kept out of the deterministic outputs: the
manifest separates files that must be byte-identical under a fixed
master seed from the informational timing files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .continuized import (
    continuized_run,
    gd_run,
    quasar_params,
    simulate_continuized_euler,
    strong_quasar_params,
    strong_quasar_step_params,
)
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
    quadratic_objective,
)
from .traces import DivergenceError

__all__ = [
    "GridSpec",
    "ExperimentConfig",
    "expand_grid",
    "parse_config",
    "config_id_of",
    "stream_for",
    "ALGORITHMS",
    "run_experiment",
    "emit_report",
    "run_grid",
    "verify_discretization",
    "worker_count",
]

RHO_SET_DEFAULT = (0.01, 0.1, 0.5)
STOCHASTIC = {"continuized-quasar", "continuized-strong", "glmtron", "accel-glmtron"}
RECOVERY = {"glmtron", "accel-glmtron"}

# grid axes each algorithm actually consumes
ALGORITHMS = {
    "gd": ("L",),
    "continuized-quasar": ("L", "rho"),
    "continuized-strong": ("L", "mu", "rho"),
    "hss-strong": ("L", "mu", "rho"),
    "hss-quasar": ("L", "rho"),
    "glmtron": ("L",),  # step = 1/L
    "accel-glmtron": (),  # constants estimated from the data, not gridded
}


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced candidate values and the admissible-pair constraint."""

    q_lo: int = -2
    q_hi: int = 4
    rho_set: tuple[float, ...] = RHO_SET_DEFAULT

    def candidates(self) -> list[float]:
        vals = []
        for q in range(self.q_lo, self.q_hi + 1):
            vals.append(10.0**q)
            vals.append(5.0 * 10.0**q)
        return sorted(vals)


def expand_grid(spec: GridSpec) -> list[tuple[float, float, float]]:
    """(L, mu, rho) tuples with L > mu, ordered by L, then mu, then rho."""
    cand = spec.candidates()
    if not cand or not spec.rho_set:
        raise ValueError("grid must contain at least one candidate and one rho")
    tuples = [
        (L, mu, rho)
        for L in cand
        for mu in cand
        if L > mu
        for rho in sorted(spec.rho_set)
    ]
    if not tuples:
        raise ValueError("no admissible (L, mu) pair in the grid")
    return sorted(tuples)


@dataclass(frozen=True)
class ExperimentConfig:
    link: str = "logistic"
    alpha: float | None = None
    n: int = 1000
    d: int = 50
    algorithms: tuple[str, ...] = ("continuized-strong", "gd", "hss-strong")
    iters: int = 3000
    runs: int = 10
    seed: int = 0
    q_lo: int = -2
    q_hi: int = 4
    rho_set: tuple[float, ...] = RHO_SET_DEFAULT
    eps: float = 1e-8  # accuracy target entering the slack of hss-quasar
    # manual moment constants for accel-glmtron; estimated from the data
    # when left unset (which needs an increasing link)
    glm_mu: float | None = None
    glm_r2: float | None = None
    glm_kappa: float | None = None

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")

    def grid(self) -> GridSpec:
        return GridSpec(q_lo=self.q_lo, q_hi=self.q_hi, rho_set=self.rho_set)


def config_id_of(cfg: ExperimentConfig) -> str:
    """Stable short id hashed from the canonical field listing."""
    canon = "|".join(
        f"{k}={getattr(cfg, k)!r}"
        for k in (
            "link",
            "alpha",
            "n",
            "d",
            "algorithms",
            "iters",
            "runs",
            "seed",
            "q_lo",
            "q_hi",
            "rho_set",
            "eps",
            "glm_mu",
            "glm_r2",
            "glm_kappa",
        )
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def stream_for(master_seed: int, config_id: str, *parts) -> SeededRng:
    """Named stream of a configuration: blake2b(config_id | parts) as stream id."""
    tag = "|".join([config_id, *map(str, parts)])
    digest = hashlib.blake2b(tag.encode(), digest_size=8).digest()
    return SeededRng(master_seed, int.from_bytes(digest, "big"))


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read the key = value experiment file (one line per field, # comments)."""
    raw: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"cannot parse config line: {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value

    def pick(key, convert, default):
        if key not in raw or raw[key] == "":
            return default
        return convert(raw[key])

    return ExperimentConfig(
        link=pick("link", str, "logistic"),
        alpha=pick("alpha", float, None),
        n=pick("n", int, 1000),
        d=pick("d", int, 50),
        algorithms=pick(
            "algorithms",
            lambda s: tuple(a.strip() for a in s.split(",") if a.strip()),
            ("continuized-strong", "gd", "hss-strong"),
        ),
        iters=pick("iters", int, 3000),
        runs=pick("runs", int, 10),
        seed=pick("seed", int, 0),
        q_lo=pick("q_lo", int, -2),
        q_hi=pick("q_hi", int, 4),
        rho_set=pick(
            "rho_set",
            lambda s: tuple(float(v) for v in s.split(",") if v.strip()),
            RHO_SET_DEFAULT,
        ),
        eps=pick("eps", float, 1e-8),
        glm_mu=pick("glm_mu", float, None),
        glm_r2=pick("glm_r2", float, None),
        glm_kappa=pick("glm_kappa", float, None),
    )


def worker_count() -> int:
    env = os.environ.get("QUASAR_OPT_WORKERS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _dedupe_key(algo: str, tup: tuple[float, float, float]):
    axes = ALGORITHMS[algo]
    L, mu, rho = tup
    return tuple(
        v for name, v in (("L", L), ("mu", mu), ("rho", rho)) if name in axes
    )


def _run_one(algo, problem, obj, w0, cfg, cid, tup, run_index):
    """One (algorithm, grid tuple, run) execution; returns its trace."""
    L, mu, rho = tup
    rng = stream_for(
        cfg.seed, cid, algo, f"L={L!r}", f"mu={mu!r}", f"rho={rho!r}", f"run={run_index}"
    )
    w_star = problem.w_star
    z0 = w0.copy()
    if algo == "gd":
        return gd_run(obj, w0, 1.0 / L, cfg.iters, w_star=w_star, seed=run_index)
    if algo == "continuized-quasar":
        sched = build_schedule(rng, cfg.iters)
        return continuized_run(
            obj, w0, z0, sched, quasar_params(rho, L), cfg.iters,
            w_star=w_star, algo=algo, seed=run_index,
        )
    if algo == "continuized-strong":
        sched = build_schedule(rng, cfg.iters)
        return continuized_run(
            obj, w0, z0, sched, strong_quasar_params(rho, mu, L), cfg.iters,
            w_star=w_star, algo=algo, seed=run_index,
        )
    if algo == "hss-strong":
        return hss_agd_strong(
            obj, w0, z0, rho, mu, L, cfg.iters,
            counter=EvalCounter(), w_star=w_star, seed=run_index,
        )
    if algo == "hss-quasar":
        return hss_agd_quasar(
            obj, w0, z0, rho, L, cfg.eps, cfg.iters,
            counter=EvalCounter(), w_star=w_star, seed=run_index,
        )
    if algo == "glmtron":
        return glmtron_run(problem, w0, 1.0 / L, cfg.iters, rng, seed=run_index)
    if algo == "accel-glmtron":
        if cfg.glm_mu is not None and cfg.glm_r2 is not None and cfg.glm_kappa is not None:
            params = GlmtronParams(mu=cfg.glm_mu, R2=cfg.glm_r2, kappa_tilde=cfg.glm_kappa)
        else:
            const_rng = stream_for(cfg.seed, cid, "glm-constants")
            mu_hat, r2_hat, kap_hat = estimate_glm_constants(
                problem, 10 * problem.n, const_rng, w=w0
            )
            params = GlmtronParams(mu=mu_hat, R2=r2_hat, kappa_tilde=kap_hat)
        sched = build_schedule(rng, cfg.iters)
        return accel_glmtron_run(
            problem, w0, z0, params, sched, cfg.iters, rng, seed=run_index
        )
    raise ValueError(f"unknown algorithm {algo!r}")


def _final_metric(algo: str, trace) -> float:
    return trace.dist[-1] if algo in RECOVERY else trace.f_gap[-1]


@dataclass
class AlgoResult:
    algo: str
    best_tuple: tuple[float, float, float] | None
    best_score: float
    traces: list  # traces of the selected tuple, one per run
    scores: dict = field(default_factory=dict)  # grid tuple -> averaged score


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    config_id: str
    per_algo: dict[str, AlgoResult]


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Full protocol: generate, sweep, replicate, select, average."""
    cid = config_id_of(cfg)
    link = make_link(cfg.link, cfg.alpha)
    problem = generate_problem(stream_for(cfg.seed, cid, "problem"), cfg.n, cfg.d, link)
    w0 = initial_point(stream_for(cfg.seed, cid, "w0"), cfg.d)
    obj = empirical_objective(problem)

    jobs = []  # (algo, representative tuple, run_index)
    for algo in cfg.algorithms:
        runs = cfg.runs if algo in STOCHASTIC else 1
        seen = {}
        for tup in expand_grid(cfg.grid()):
            key = _dedupe_key(algo, tup)
            if key in seen:
                continue
            seen[key] = tup
            for r in range(runs):
                jobs.append((algo, tup, r))

    def execute(job):
        algo, tup, r = job
        try:
            trace = _run_one(algo, problem, obj, w0, cfg, cid, tup, r)
            return job, trace, _final_metric(algo, trace)
        except DivergenceError as err:
            return job, err.trace, math.inf

    results = {}
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for job, trace, score in pool.map(execute, jobs):
            results[job] = (trace, score)

    per_algo: dict[str, AlgoResult] = {}
    for algo in cfg.algorithms:
        runs = cfg.runs if algo in STOCHASTIC else 1
        scores = {}
        seen = {}
        for tup in expand_grid(cfg.grid()):
            key = _dedupe_key(algo, tup)
            if key in seen:
                continue
            seen[key] = tup
            vals = [results[(algo, tup, r)][1] for r in range(runs)]
            scores[tup] = math.inf if any(math.isinf(v) for v in vals) else float(np.mean(vals))
        best_tuple = min(scores, key=lambda t: (scores[t], t))
        best_score = scores[best_tuple]
        if math.isinf(best_score):
            traces = []
            best_tuple = None
        else:
            traces = [results[(algo, best_tuple, r)][0] for r in range(runs)]
        per_algo[algo] = AlgoResult(
            algo=algo, best_tuple=best_tuple, best_score=best_score,
            traces=traces, scores=scores,
        )
    return ExperimentResult(config=cfg, config_id=cid, per_algo=per_algo)


def _fmt(x) -> str:
    return repr(float(x))


def _average_rows(algo: str, traces) -> tuple[list[str], list[list[str]]]:
    """Run-averaged rows of the selected traces (without wall time)."""
    recovery = algo in RECOVERY
    n_rows = min(len(t) for t in traces)
    rows = []
    for i in range(n_rows):
        t_mean = float(np.mean([t.times[i] for t in traces]))
        if recovery:
            calls = float(np.mean([t.pg_calls[i] for t in traces]))
            gap = math.nan
            dist = float(np.mean([t.dist[i] for t in traces]))
        else:
            calls = float(np.mean([t.grad_calls[i] for t in traces]))
            gap = float(np.mean([t.f_gap[i] for t in traces]))
            dist = float(np.mean([t.dist[i] for t in traces]))
        rows.append([algo, str(i), _fmt(t_mean), _fmt(calls), _fmt(gap), _fmt(dist)])
    header = ["algo", "iteration", "T_k", "grad_calls", "f_gap", "dist"]
    return header, rows


def _mean_times(traces) -> list[float]:
    n_rows = min(len(t) for t in traces)
    have = hasattr(traces[0], "time_s")
    if not have:
        return [math.nan] * n_rows
    return [float(np.mean([t.time_s[i] for t in traces])) for i in range(n_rows)]


def emit_report(result: ExperimentResult, out_dir: str | Path) -> dict:
    """Write traces, per-axis plot data, the score table and the manifest."""
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "plot_data").mkdir(parents=True, exist_ok=True)
    deterministic: list[str] = []
    informational: list[str] = []

    for algo, res in result.per_algo.items():
        if not res.traces:
            # every grid tuple diverged: keep a header-only file so the
            # output directory shape is stable
            header = ["algo", "iteration", "T_k", "grad_calls", "f_gap", "dist"]
            rows = []
        else:
            header, rows = _average_rows(algo, res.traces)
        trace_path = out / "traces" / f"{algo}.csv"
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        deterministic.append(str(trace_path.relative_to(out)))
        if not rows:
            continue

        # per-axis extracts for the plotting layer
        axes = ["iteration"] if algo in RECOVERY else ["iteration", "grad_calls"]
        for axis in axes:
            path = out / "plot_data" / f"{algo}__{axis}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["algo", "seed", axis, "f_gap", "dist"])
                for i, row in enumerate(rows):
                    x = row[1] if axis == "iteration" else row[3]
                    writer.writerow([algo, str(result.config.seed), x, row[4], row[5]])
            deterministic.append(str(path.relative_to(out)))

        if algo not in RECOVERY:
            times = _mean_times(res.traces)
            path = out / "plot_data" / f"{algo}__time_s.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["algo", "seed", "time_s", "f_gap", "dist"])
                for i, row in enumerate(rows):
                    writer.writerow(
                        [algo, str(result.config.seed), _fmt(times[i]), row[4], row[5]]
                    )
            informational.append(str(path.relative_to(out)))

    score_path = out / "grid_scores.csv"
    with open(score_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "L", "mu", "rho", "score"])
        for algo, res in result.per_algo.items():
            axes = ALGORITHMS[algo]
            for tup in sorted(res.scores):
                L, mu, rho = tup
                writer.writerow(
                    [
                        algo,
                        _fmt(L) if "L" in axes else "",
                        _fmt(mu) if "mu" in axes else "",
                        _fmt(rho) if "rho" in axes else "",
                        _fmt(res.scores[tup]) if math.isfinite(res.scores[tup]) else "inf",
                    ]
                )
    deterministic.append(str(score_path.relative_to(out)))

    summary = {
        "config_id": result.config_id,
        "master_seed": result.config.seed,
        "best": {},
    }
    for algo, res in result.per_algo.items():
        axes = ALGORITHMS[algo]
        if res.best_tuple is None:
            summary["best"][algo] = None
            continue
        L, mu, rho = res.best_tuple
        summary["best"][algo] = {
            "L": L if "L" in axes else None,
            "mu": mu if "mu" in axes else None,
            "rho": rho if "rho" in axes else None,
            "score": res.best_score,
        }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    deterministic.append(str(summary_path.relative_to(out)))

    manifest = {
        "config_id": result.config_id,
        "deterministic": sorted(deterministic),
        "informational": sorted(informational),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def run_grid(cfg: ExperimentConfig, out_dir: str | Path) -> dict:
    return emit_report(run_experiment(cfg), out_dir)


def verify_discretization(
    seed: int = 0,
    k_events: int = 20,
    dt: float = 1e-4,
    rho: float = 1.0,
    mu: float = 1.0,
    L: float = 10.0,
) -> dict:
    """Check the event recursion against a fine-Euler flow simulation.

    A 2-d quadratic is run under the linear-rate schedule on one fixed
    clock realization; the per-event iterates are compared with explicit
    Euler integration of the underlying flow at step dt and 2 dt. The
    returned report carries both worst-case relative errors and their
    ratio (close to 2 when the oracle converges at first order).
    """
    obj = quadratic_objective(np.array([mu, L]), w_star=np.array([0.3, -0.2]))
    w_star = np.array([0.3, -0.2])
    w0 = np.array([1.5, 2.0])
    z0 = w0.copy()
    rng = SeededRng(seed, 7)
    sched = build_schedule(rng, k_events)

    trace = continuized_run(
        obj, w0, z0, sched, strong_quasar_params(rho, mu, L), k_events,
        w_star=w_star, keep_iterates=True,
    )
    disc_w = np.array(trace.iterates_w[1:])

    rate = math.sqrt(mu / L)
    errors = {}
    for step in (dt, 2.0 * dt):
        res = simulate_continuized_euler(
            obj, w0, z0, sched.times,
            eta=lambda t: rate,
            eta_prime=lambda t: rho * rate,
            gamma=lambda t: 1.0 / L,
            gamma_prime=lambda t: 1.0 / math.sqrt(mu * L),
            euler_dt=step,
        )
        rel = np.linalg.norm(disc_w - res.w_at_jumps, axis=1) / (
            1.0 + np.linalg.norm(res.w_at_jumps, axis=1)
        )
        errors[step] = float(rel.max())
    return {
        "dt": dt,
        "events": k_events,
        "max_rel_error": errors[dt],
        "max_rel_error_2dt": errors[2.0 * dt],
        "refinement_ratio": errors[2.0 * dt] / errors[dt] if errors[dt] > 0 else math.inf,
    }
