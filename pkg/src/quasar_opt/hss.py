"""Deterministic AGD baselines that locate their mixing weight by bisection.

These are the reference momentum methods the randomized optimizers are
measured against. Each iteration calls a line-search subroutine that may
evaluate the objective and its gradient several times, so the per-call
accounting (EvalCounter) is the whole point: iteration counts understate
their true oracle cost.

The line search works on the restriction g(alpha) = f(alpha w + (1-alpha) z)
and returns the first midpoint of a value-guided bisection that satisfies

    c g(alpha) + alpha (g'(alpha) - alpha p) <= c g(1) + eps_tilde,

where p = b ||w - z||^2, after checking three cheap early exits (an
optional caller guess, alpha = 1, alpha = 0). The bisection bracket
shrinks by comparing g at the midpoint against g at the initial upper
end, exactly as published; no smarter search is substituted because this
module exists to be a faithful baseline.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .objectives import EvalCounter, Objective, counted_objective
from .traces import DivergenceError, RunTrace
from .continuized import DIVERGENCE_GAP

__all__ = [
    "LineSearchQuery",
    "LineSearchResult",
    "binary_line_search",
    "theta_sequence",
    "hss_agd_strong",
    "hss_agd_quasar",
]


@dataclass(frozen=True)
class LineSearchQuery:
    """Inputs of one line-search call."""

    w: np.ndarray
    z: np.ndarray
    b: float
    c: float
    eps_tilde: float
    guess: float | None = None

    def __post_init__(self) -> None:
        if self.b < 0 or self.c < 0 or self.eps_tilde < 0:
            raise ValueError("b, c and eps_tilde must be nonnegative")
        if self.guess is not None and not 0.0 <= self.guess <= 1.0:
            raise ValueError("guess must lie in [0, 1]")


@dataclass(frozen=True)
class LineSearchResult:
    alpha: float
    capped: bool  # max_bisect hit before the exit inequality held
    n_bisect: int
    bracket: tuple[float, float]  # final (lo, hi)


def binary_line_search(
    obj: Objective,
    q: LineSearchQuery,
    L: float,
    max_bisect: int = 100,
    counter: EvalCounter | None = None,
) -> LineSearchResult:
    """Mixing weight in [0, 1] satisfying the exit inequality.

    All g and g' evaluations (one f resp. one grad call each) are charged
    to counter. A cap on bisection steps guards against floating-point
    stagnation: past max_bisect the midpoint cannot move, so the current
    alpha is returned flagged instead of looping forever.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    counter = counter if counter is not None else EvalCounter()
    fobj = counted_objective(obj, counter)
    w, z = q.w, q.z
    direction = w - z
    wz_sq = float(np.dot(direction, direction))
    p = q.b * wz_sq

    def g(alpha: float) -> float:
        return fobj.f(alpha * w + (1.0 - alpha) * z)

    def g_prime(alpha: float) -> float:
        return float(np.dot(fobj.grad(alpha * w + (1.0 - alpha) * z), direction))

    if wz_sq == 0.0:
        # g is constant: the slope test at 1 holds trivially
        return LineSearchResult(alpha=1.0, capped=False, n_bisect=0, bracket=(1.0, 1.0))

    g1 = g(1.0)
    if q.guess is not None:
        gm = q.guess
        if q.c * g(gm) + gm * (g_prime(gm) - gm * p) <= q.c * g1 + q.eps_tilde:
            return LineSearchResult(alpha=gm, capped=False, n_bisect=0, bracket=(gm, gm))

    if g_prime(1.0) <= q.eps_tilde + p:
        return LineSearchResult(alpha=1.0, capped=False, n_bisect=0, bracket=(1.0, 1.0))
    if q.c == 0.0 or g(0.0) <= g1 + q.eps_tilde / q.c:
        return LineSearchResult(alpha=0.0, capped=False, n_bisect=0, bracket=(0.0, 0.0))

    tau = 1.0 - (q.eps_tilde + p) / (L * wz_sq)
    lo, hi, alpha = 0.0, tau, tau
    g_tau = g(tau)
    g_alpha = g_tau  # g at the current candidate, reused by the exit test
    n = 0
    while q.c * g_alpha + alpha * (g_prime(alpha) - alpha * p) > q.c * g1 + q.eps_tilde:
        if n >= max_bisect:
            return LineSearchResult(alpha=alpha, capped=True, n_bisect=n, bracket=(lo, hi))
        alpha = 0.5 * (lo + hi)
        g_alpha = g(alpha)
        if g_alpha <= g_tau:
            hi = alpha
        else:
            lo = alpha
        n += 1
    return LineSearchResult(alpha=alpha, capped=False, n_bisect=n, bracket=(lo, hi))


def theta_sequence(k_max: int) -> np.ndarray:
    """theta_0..theta_{k_max}: theta_k = (theta_{k-1}/2)(sqrt(theta_{k-1}^2+4) - theta_{k-1}).

    Starts from theta_{-1} = 1; strictly decreasing and positive, with
    1/theta_k growing by roughly 1/2 per step.
    """
    out = np.empty(k_max + 1)
    prev = 1.0
    for k in range(k_max + 1):
        prev = 0.5 * prev * (math.sqrt(prev * prev + 4.0) - prev)
        out[k] = prev
    return out


def _finish_row(trace, k, counter, start, gap, dist) -> None:
    trace.append(k, float(k), counter.grad_calls, time.perf_counter() - start, gap, dist)


def hss_agd_strong(
    obj: Objective,
    w0: np.ndarray,
    z0: np.ndarray,
    rho: float,
    mu: float,
    L: float,
    k_max: int,
    counter: EvalCounter | None = None,
    w_star: np.ndarray | None = None,
    seed: int = 0,
    max_bisect: int = 100,
) -> RunTrace:
    """Linear-rate AGD baseline for the strong curvature regime.

    Per iteration the mixing weight is 1 - alpha_k from a line search
    with (b, c, eps) = (rho mu / 2, sqrt(L/mu), 0); the secondary mixing
    weight is the fixed rho sqrt(mu/L) and the two gradient coefficients
    are 1/L and 1/sqrt(mu L).
    """
    if rho <= 0 or mu <= 0 or L <= 0:
        raise ValueError("rho, mu and L must be positive")
    counter = counter if counter is not None else EvalCounter()
    stepper = counted_objective(obj, counter)
    f_star = obj.f(w_star) if w_star is not None else 0.0
    tau_prime = rho * math.sqrt(mu / L)
    gamma = 1.0 / L
    gamma_prime = 1.0 / math.sqrt(mu * L)
    b = rho * mu / 2.0
    c = math.sqrt(L / mu)

    trace = RunTrace(algo="hss-strong", seed=seed)
    w = np.array(w0, dtype=float)
    z = np.array(z0, dtype=float)
    start = time.perf_counter()
    gap = obj.f(w) - f_star
    dist = float(np.linalg.norm(w - w_star)) if w_star is not None else math.nan
    _finish_row(trace, 0, counter, start, gap, dist)

    for k in range(k_max):
        res = binary_line_search(
            obj, LineSearchQuery(w=w, z=z, b=b, c=c, eps_tilde=0.0), L, max_bisect, counter
        )
        tau = 1.0 - res.alpha
        v = w + tau * (z - w)
        g = stepper.grad(v)
        w = v - gamma * g
        z = z + tau_prime * (v - z) - gamma_prime * g

        gap = obj.f(w) - f_star
        dist = float(np.linalg.norm(w - w_star)) if w_star is not None else math.nan
        _finish_row(trace, k + 1, counter, start, gap, dist)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))) or gap > DIVERGENCE_GAP:
            trace.diverged = True
            raise DivergenceError(
                f"hss-strong diverged at iteration {k + 1}", trace=trace, last_state=(w, z)
            )
    return trace


def hss_agd_quasar(
    obj: Objective,
    w0: np.ndarray,
    z0: np.ndarray,
    rho: float,
    L: float,
    eps: float,
    k_max: int,
    counter: EvalCounter | None = None,
    w_star: np.ndarray | None = None,
    seed: int = 0,
    max_bisect: int = 100,
) -> RunTrace:
    """1/t^2-rate AGD baseline; needs a target accuracy eps for its slack.

    The line-search slack is rho eps / 2 and the secondary gradient
    coefficient is rho / (L theta_{k+1}) with the shrinking theta
    sequence; the secondary mixing weight is zero in this regime.
    """
    if rho <= 0 or L <= 0:
        raise ValueError("rho and L must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    counter = counter if counter is not None else EvalCounter()
    stepper = counted_objective(obj, counter)
    f_star = obj.f(w_star) if w_star is not None else 0.0
    thetas = theta_sequence(k_max + 1)
    gamma = 1.0 / L
    eps_tilde = rho * eps / 2.0

    trace = RunTrace(algo="hss-quasar", seed=seed)
    w = np.array(w0, dtype=float)
    z = np.array(z0, dtype=float)
    start = time.perf_counter()
    gap = obj.f(w) - f_star
    dist = float(np.linalg.norm(w - w_star)) if w_star is not None else math.nan
    _finish_row(trace, 0, counter, start, gap, dist)

    for k in range(k_max):
        c = rho * (1.0 / thetas[k] - 1.0)
        res = binary_line_search(
            obj, LineSearchQuery(w=w, z=z, b=0.0, c=c, eps_tilde=eps_tilde), L, max_bisect, counter
        )
        tau = 1.0 - res.alpha
        v = w + tau * (z - w)
        g = stepper.grad(v)
        w = v - gamma * g
        z = z - (rho / (L * thetas[k + 1])) * g

        gap = obj.f(w) - f_star
        dist = float(np.linalg.norm(w - w_star)) if w_star is not None else math.nan
        _finish_row(trace, k + 1, counter, start, gap, dist)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))) or gap > DIVERGENCE_GAP:
            trace.diverged = True
            raise DivergenceError(
                f"hss-quasar diverged at iteration {k + 1}", trace=trace, last_state=(w, z)
            )
    return trace
