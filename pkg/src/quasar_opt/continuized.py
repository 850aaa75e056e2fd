"""Randomized momentum methods driven by the Poisson event clock.

The method keeps a primary iterate w and a secondary iterate z. Between
consecutive event times the pair relaxes toward each other along a linear
flow; at an event time both take a gradient step at the relaxed point.
Because the flow between events integrates in closed form, the whole
continuous-time process can be advanced event-to-event with no
discretization error: per event k the update is

    v_k     = w_k + tau_k (z_k - w_k)
    w_{k+1} = v_k - gamma_{k+1} grad f(v_k)
    z_{k+1} = z_k + tau'_k (v_k - z_k) - gamma'_{k+1} grad f(v_k)

with exactly one gradient evaluation per event. The mixing pair
(tau_k, tau'_k) summarizes the flow over (T_k, T_{k+1}]; the gradient
coefficients carry the next index because they are the continuous step
sizes sampled at the event time T_{k+1} that closes the interval.

Two parameter schedules are provided: a 1/t^2-rate schedule needing only
the curvature ratio rho, and a linear-rate schedule for the strong form
needing (rho, mu, L). A plain gradient-descent baseline and a fine-step
Euler simulator of the underlying flow (used as an independent test
oracle, never in production runs) live here too.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .event_clock import JumpSchedule
from .objectives import EvalCounter, Objective, counted_objective
from .traces import DivergenceError, RunTrace

__all__ = [
    "StepParams",
    "quasar_step_params",
    "strong_quasar_step_params",
    "quasar_params",
    "strong_quasar_params",
    "continuized_run",
    "gd_run",
    "EulerResult",
    "simulate_continuized_euler",
    "lyapunov_monitor_strong",
    "DIVERGENCE_GAP",
]

DIVERGENCE_GAP = 1e12

# effective per-event parameter source: (k, T_k, T_{k+1}) -> StepParams
ParamsFn = Callable[[int, float, float], "StepParams"]


@dataclass(frozen=True)
class StepParams:
    """One event's parameter bundle: mixing pair and gradient coefficients."""

    tau: float
    tau_prime: float
    gamma: float
    gamma_prime: float

    def __post_init__(self) -> None:
        for name in ("tau", "tau_prime", "gamma", "gamma_prime"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.tau <= 1.0 or not 0.0 <= self.tau_prime <= 1.0:
            raise ValueError("mixing coefficients must lie in [0, 1]")


def quasar_step_params(rho: float, L: float, t_k: float, t_k1: float) -> StepParams:
    """Index-k bundle of the 1/t^2-rate schedule.

    tau_k = 1 - (T_k/T_{k+1})^(2/rho), tau'_k = 0, gamma_k = 1/L,
    gamma'_k = rho T_k / (2L). At T_0 = 0 the power vanishes and the
    mixing coefficient is 1, matching the flow's singular speed at the
    time origin; gamma'_0 = 0 follows the formula literally and is never
    applied (updates use the bundle one index ahead).
    """
    if rho <= 0 or L <= 0:
        raise ValueError("rho and L must be positive")
    if t_k < 0 or t_k >= t_k1:
        raise ValueError("need 0 <= T_k < T_{k+1}")
    return StepParams(
        tau=1.0 - (t_k / t_k1) ** (2.0 / rho),
        tau_prime=0.0,
        gamma=1.0 / L,
        gamma_prime=rho * t_k / (2.0 * L),
    )


def strong_quasar_step_params(rho: float, mu: float, L: float, dT: float) -> StepParams:
    """Bundle of the linear-rate schedule for an increment of length dT.

    With e = exp(-(1+rho) sqrt(mu/L) dT):
    tau = (1-e)/(1+rho), tau' = rho(1-e)/(rho+e), gamma = 1/L,
    gamma' = 1/sqrt(mu L). Time-homogeneous, so the bundle depends on the
    increment only.
    """
    if rho <= 0 or mu <= 0 or L <= 0:
        raise ValueError("rho, mu and L must be positive")
    if dT < 0:
        raise ValueError("increment must be nonnegative")
    e = math.exp(-(1.0 + rho) * math.sqrt(mu / L) * dT)
    return StepParams(
        tau=(1.0 - e) / (1.0 + rho),
        tau_prime=rho * (1.0 - e) / (rho + e),
        gamma=1.0 / L,
        gamma_prime=1.0 / math.sqrt(mu * L),
    )


def quasar_params(rho: float, L: float) -> ParamsFn:
    """Effective per-event source for the 1/t^2-rate schedule.

    The gradient coefficients are the continuous step sizes at the event
    time T_{k+1}, i.e. the literal bundle one index ahead.
    """

    def fn(k: int, t_k: float, t_k1: float) -> StepParams:
        mix = quasar_step_params(rho, L, t_k, t_k1)
        return StepParams(
            tau=mix.tau,
            tau_prime=mix.tau_prime,
            gamma=1.0 / L,
            gamma_prime=rho * t_k1 / (2.0 * L),
        )

    return fn


def strong_quasar_params(rho: float, mu: float, L: float) -> ParamsFn:
    """Effective per-event source for the linear-rate schedule."""

    def fn(k: int, t_k: float, t_k1: float) -> StepParams:
        return strong_quasar_step_params(rho, mu, L, t_k1 - t_k)

    return fn


def _metrics(obj: Objective, w: np.ndarray, w_star, f_star: float) -> tuple[float, float]:
    gap = obj.f(w) - f_star
    dist = float(np.linalg.norm(w - w_star)) if w_star is not None else math.nan
    return gap, dist


def continuized_run(
    obj: Objective,
    w0: np.ndarray,
    z0: np.ndarray,
    schedule: JumpSchedule,
    params_fn: ParamsFn,
    k_max: int,
    w_star: np.ndarray | None = None,
    algo: str = "continuized",
    seed: int = 0,
    keep_iterates: bool = False,
    counter: EvalCounter | None = None,
) -> RunTrace:
    """Run k_max events of the randomized momentum method.

    Exactly one gradient evaluation per event, charged to counter. The
    value gap is measured against f(w_star) when the minimizer is given,
    otherwise raw f values are recorded. Raises DivergenceError when an
    iterate leaves the finite range or the gap passes DIVERGENCE_GAP,
    with the trace so far attached.
    """
    if len(schedule) < k_max:
        raise ValueError(f"schedule has {len(schedule)} events, need {k_max}")
    if w0.shape != (obj.dim,) or z0.shape != (obj.dim,):
        raise ValueError("initial points must match the objective dimension")
    counter = counter if counter is not None else EvalCounter()
    stepper = counted_objective(obj, counter)
    f_star = obj.f(w_star) if w_star is not None else 0.0

    trace = RunTrace(algo=algo, seed=seed)
    w = np.array(w0, dtype=float)
    z = np.array(z0, dtype=float)
    start = time.perf_counter()
    gap, dist = _metrics(obj, w, w_star, f_star)
    trace.append(0, 0.0, counter.grad_calls, 0.0, gap, dist)
    if keep_iterates:
        trace.iterates_w.append(w.copy())
        trace.iterates_z.append(z.copy())

    t_prev = 0.0
    for k in range(k_max):
        t_next = float(schedule.times[k])
        p = params_fn(k, t_prev, t_next)
        v = w + p.tau * (z - w)
        g = stepper.grad(v)
        w = v - p.gamma * g
        z = z + p.tau_prime * (v - z) - p.gamma_prime * g
        t_prev = t_next

        gap, dist = _metrics(obj, w, w_star, f_star)
        trace.append(k + 1, t_next, counter.grad_calls, time.perf_counter() - start, gap, dist)
        if keep_iterates:
            trace.iterates_w.append(w.copy())
            trace.iterates_z.append(z.copy())
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))) or gap > DIVERGENCE_GAP:
            trace.diverged = True
            raise DivergenceError(
                f"{algo} diverged at event {k + 1} (gap={gap:.3e})",
                trace=trace,
                last_state=(w.copy(), z.copy()),
            )
    return trace


def gd_run(
    obj: Objective,
    w0: np.ndarray,
    step: float,
    k_max: int,
    w_star: np.ndarray | None = None,
    seed: int = 0,
    counter: EvalCounter | None = None,
) -> RunTrace:
    """Plain gradient descent with a constant step; the clockless baseline.

    The event-time column is filled with the iteration index.
    """
    if step < 0:
        raise ValueError("step must be nonnegative")
    counter = counter if counter is not None else EvalCounter()
    stepper = counted_objective(obj, counter)
    f_star = obj.f(w_star) if w_star is not None else 0.0

    trace = RunTrace(algo="gd", seed=seed)
    w = np.array(w0, dtype=float)
    start = time.perf_counter()
    gap, dist = _metrics(obj, w, w_star, f_star)
    trace.append(0, 0.0, counter.grad_calls, 0.0, gap, dist)
    for k in range(k_max):
        w = w - step * stepper.grad(w)
        gap, dist = _metrics(obj, w, w_star, f_star)
        trace.append(k + 1, float(k + 1), counter.grad_calls, time.perf_counter() - start, gap, dist)
        if not np.all(np.isfinite(w)) or gap > DIVERGENCE_GAP:
            trace.diverged = True
            raise DivergenceError(
                f"gd diverged at iteration {k + 1} (gap={gap:.3e})",
                trace=trace,
                last_state=w.copy(),
            )
    return trace


@dataclass
class EulerResult:
    """States of the simulated flow sampled just after each event."""

    w_at_jumps: np.ndarray  # (K, d), post-jump
    z_at_jumps: np.ndarray
    w_final: np.ndarray
    z_final: np.ndarray


def simulate_continuized_euler(
    obj: Objective,
    w0: np.ndarray,
    z0: np.ndarray,
    jump_times: np.ndarray,
    eta: Callable[[float], float],
    eta_prime: Callable[[float], float],
    gamma: Callable[[float], float],
    gamma_prime: Callable[[float], float],
    euler_dt: float,
    t0: float = 0.0,
) -> EulerResult:
    """Explicit-Euler integration of the two-iterate flow with gradient jumps.

    Between events: dw = eta(t) (z - w) dt, dz = eta'(t) (w - z) dt.
    At each event time: w <- w - gamma(t) grad f(w), z <- z - gamma'(t)
    grad f(w), both using the pre-jump w. This is a validation oracle:
    it deliberately integrates the raw flow instead of using the closed
    form, so agreement with the event-to-event recursion is an
    independent check, with O(dt) accuracy.
    """
    if euler_dt <= 0:
        raise ValueError("euler_dt must be positive")
    jump_times = np.asarray(jump_times, dtype=float)
    if jump_times.size and jump_times[0] <= t0:
        raise ValueError("all jump times must exceed the start time")

    w = np.array(w0, dtype=float)
    z = np.array(z0, dtype=float)
    w_hist = np.empty((jump_times.size, w.size))
    z_hist = np.empty((jump_times.size, z.size))

    t = t0
    for j, t_jump in enumerate(jump_times):
        span = t_jump - t
        n_full = int(span // euler_dt)
        for i in range(n_full):
            h = eta(t)
            hp = eta_prime(t)
            dw = (euler_dt * h) * (z - w)
            dz = (euler_dt * hp) * (w - z)
            w += dw
            z += dz
            t += euler_dt
        rem = t_jump - t
        if rem > 0:
            dw = (rem * eta(t)) * (z - w)
            dz = (rem * eta_prime(t)) * (w - z)
            w += dw
            z += dz
        t = t_jump
        g = obj.grad(w)
        z = z - gamma_prime(t) * g
        w = w - gamma(t) * g
        w_hist[j] = w
        z_hist[j] = z
    return EulerResult(w_at_jumps=w_hist, z_at_jumps=z_hist, w_final=w, z_final=z)


def lyapunov_monitor_strong(
    ws: np.ndarray,
    zs: np.ndarray,
    times: np.ndarray,
    rho: float,
    mu: float,
    L: float,
    w_star: np.ndarray,
    f_star: float,
    f: Callable[[np.ndarray], float],
) -> np.ndarray:
    """Exponentially weighted potential along a recorded trajectory.

    phi_k = exp(rho sqrt(mu/L) T_k) [ (f(w_k) - f_star)
                                      + (mu/2) ||z_k - w_star||^2 ].

    The process makes this a supermartingale under the linear-rate
    schedule, so its ensemble mean should not increase; monitoring it is
    a cheap sanity probe on a run.
    """
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    times = np.asarray(times, dtype=float)
    rate = rho * math.sqrt(mu / L)
    out = np.empty(times.size)
    for k in range(times.size):
        gap = f(ws[k]) - f_star
        zdev = zs[k] - w_star
        out[k] = math.exp(rate * times[k]) * (gap + 0.5 * mu * float(np.dot(zdev, zdev)))
    return out
