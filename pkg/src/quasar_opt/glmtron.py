"""Stochastic recovery of a GLM target via pseudo-gradient steps.

The target w_star is unknown, so neither the distance objective nor its
gradient can be evaluated; each step instead draws one sample uniformly
and moves against its pseudo-gradient (sigma(w.x) - y) x, which is
positively correlated with the distance gradient whenever the link is
increasing. Two variants: the plain single-step method, and a
momentum version driven by the Poisson event clock whose parameters are
set by the moment constants (mu, R^2, kappa_tilde) of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .continuized import StepParams
from .event_clock import JumpSchedule, SeededRng
from .objectives import GlmProblem, empirical_h_matrix, pseudo_gradient
from .traces import DivergenceError, RecoveryTrace

__all__ = [
    "GlmtronParams",
    "glmtron_run",
    "accel_glmtron_step_params",
    "accel_glmtron_run",
    "accel_glmtron_lyapunov",
]

_DIVERGE_DIST = 1e9


@dataclass(frozen=True)
class GlmtronParams:
    """Moment constants steering the momentum variant.

    kappa_tilde can never exceed R2/mu (the whitened fourth moment is
    dominated by the plain one over mu), so construction rejects
    inconsistent bundles.
    """

    mu: float
    R2: float
    kappa_tilde: float

    def __post_init__(self) -> None:
        if self.mu <= 0 or self.R2 <= 0 or self.kappa_tilde <= 0:
            raise ValueError("all constants must be positive")
        if self.kappa_tilde > self.R2 / self.mu * (1.0 + 1e-8):
            raise ValueError(
                f"kappa_tilde={self.kappa_tilde} exceeds R2/mu={self.R2 / self.mu}"
            )

    @property
    def rate(self) -> float:
        """sqrt(mu / (kappa_tilde R^2)), the momentum variant's decay rate."""
        return math.sqrt(self.mu / (self.kappa_tilde * self.R2))


def _alpha_of(problem: GlmProblem) -> float:
    link = problem.link
    return link.param if link.param is not None else link.increase_alpha


def glmtron_run(
    problem: GlmProblem,
    w0: np.ndarray,
    step: float,
    k_max: int,
    rng: SeededRng,
    seed: int = 0,
) -> RecoveryTrace:
    """Plain single-sample pseudo-gradient descent.

    One pseudo-gradient per iteration; the event-time column carries the
    iteration index since this variant has no clock.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    trace = RecoveryTrace(algo="glmtron", seed=seed, alpha=_alpha_of(problem))
    w = np.array(w0, dtype=float)
    trace.append(0, 0.0, 0, float(np.linalg.norm(w - problem.w_star)))
    for k in range(k_max):
        i = int(rng.integers(problem.n))
        w = w - step * pseudo_gradient(problem, w, i)
        dist = float(np.linalg.norm(w - problem.w_star))
        trace.append(k + 1, float(k + 1), k + 1, dist)
        if not np.all(np.isfinite(w)) or dist > _DIVERGE_DIST:
            trace.diverged = True
            raise DivergenceError(
                f"glmtron diverged at iteration {k + 1}", trace=trace, last_state=w
            )
    return trace


def accel_glmtron_step_params(p: GlmtronParams, dT: float) -> StepParams:
    """Event bundle of the momentum variant for an increment of length dT.

    With e = exp(-2 rate dT): tau = (1-e)/2, tau' = (1-e)/(1+e),
    gamma = 1/R^2, gamma' = 1/sqrt(mu kappa_tilde R^2). Time-homogeneous.
    """
    if dT < 0:
        raise ValueError("increment must be nonnegative")
    e = math.exp(-2.0 * p.rate * dT)
    return StepParams(
        tau=0.5 * (1.0 - e),
        tau_prime=(1.0 - e) / (1.0 + e),
        gamma=1.0 / p.R2,
        gamma_prime=1.0 / math.sqrt(p.mu * p.kappa_tilde * p.R2),
    )


def accel_glmtron_run(
    problem: GlmProblem,
    w0: np.ndarray,
    z0: np.ndarray,
    params: GlmtronParams,
    schedule: JumpSchedule,
    k_max: int,
    rng: SeededRng,
    seed: int = 0,
    keep_iterates: bool = False,
) -> RecoveryTrace:
    """Momentum recovery: the two-iterate event recursion with one
    pseudo-gradient per event.

    v_k = w_k + tau_k (z_k - w_k); draw a sample; both iterates step
    against its pseudo-gradient at v_k.
    """
    if len(schedule) < k_max:
        raise ValueError(f"schedule has {len(schedule)} events, need {k_max}")
    trace = RecoveryTrace(algo="accel-glmtron", seed=seed, alpha=_alpha_of(problem))
    w = np.array(w0, dtype=float)
    z = np.array(z0, dtype=float)
    trace.append(0, 0.0, 0, float(np.linalg.norm(w - problem.w_star)))
    ws = [w.copy()] if keep_iterates else None
    zs = [z.copy()] if keep_iterates else None

    t_prev = 0.0
    for k in range(k_max):
        t_next = float(schedule.times[k])
        p = accel_glmtron_step_params(params, t_next - t_prev)
        v = w + p.tau * (z - w)
        i = int(rng.integers(problem.n))
        g = pseudo_gradient(problem, v, i)
        w = v - p.gamma * g
        z = z + p.tau_prime * (v - z) - p.gamma_prime * g
        t_prev = t_next

        dist = float(np.linalg.norm(w - problem.w_star))
        trace.append(k + 1, t_next, k + 1, dist)
        if keep_iterates:
            ws.append(w.copy())
            zs.append(z.copy())
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))) or dist > _DIVERGE_DIST:
            trace.diverged = True
            raise DivergenceError(
                f"accel-glmtron diverged at event {k + 1}", trace=trace, last_state=(w, z)
            )
    if keep_iterates:
        trace.iterates_w = ws
        trace.iterates_z = zs
    return trace


def accel_glmtron_lyapunov(
    problem: GlmProblem,
    ws: np.ndarray,
    zs: np.ndarray,
    times: np.ndarray,
    params: GlmtronParams,
    h_ref: np.ndarray | None = None,
) -> np.ndarray:
    """Exponentially weighted recovery potential along a trajectory.

    phi_k = exp(rate T_k) [ 0.5 ||w_k - w*||^2
                            + (mu/2) ||z_k - w*||^2_{H^{-1}} ],

    with the metric H frozen at a reference point (default: the first
    recorded w). A time-varying metric would track the analysis more
    closely, but the frozen form is what can be monitored cheaply and is
    exact whenever H does not depend on w (identity link).
    """
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    times = np.asarray(times, dtype=float)
    if h_ref is None:
        h_ref = empirical_h_matrix(problem, ws[0])
    h_inv = np.linalg.inv(h_ref)
    out = np.empty(times.size)
    for k in range(times.size):
        dw = ws[k] - problem.w_star
        dz = zs[k] - problem.w_star
        out[k] = math.exp(params.rate * times[k]) * (
            0.5 * float(np.dot(dw, dw)) + 0.5 * params.mu * float(dz @ h_inv @ dz)
        )
    return out
