"""Sampling-based certification of curvature-like conditions.

Each checker evaluates a pointwise margin at every supplied point and
reports the worst one; a certificate holds when no sampled margin dips
below -tol. Margins are kept raw in the report so a caller can
re-threshold without rerunning. Nothing here is a global guarantee:
the suite certifies a condition on the sampled region only, which is
all the optimizers need because iterates stay in a bounded tube.

The conversion helpers turn one certified condition into another
(coherence pairs into a curvature ratio, one-point or quadratic-growth
certificates into the strong form with its quadratic term).
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .event_clock import SeededRng
from .objectives import GlmProblem, Objective

__all__ = [
    "QuasarConstants",
    "CoherenceWitness",
    "CertReport",
    "sample_ball",
    "default_cert_points",
    "check_quasar",
    "estimate_rho",
    "check_strong_quasar",
    "check_one_point_convex",
    "check_pl",
    "check_qg",
    "estimate_cv",
    "estimate_qg_nu",
    "coherence_to_quasar",
    "glm_quasar_constant",
    "one_point_to_strong_quasar",
    "qg_to_strong_quasar",
    "glm_qg_constant",
    "relu_gen_smooth_constant",
    "phase_retrieval_cr",
    "estimate_smoothness_L",
    "verify_coherence_witness",
]


@dataclass(frozen=True)
class QuasarConstants:
    """Curvature bundle (rho, mu, L)."""

    rho: float
    mu: float
    L: float

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.mu > 0 and self.rho > 1:
            warnings.warn(
                f"rho={self.rho} lies outside (0, 1]; the strong certificates "
                "are usually stated for that range",
                stacklevel=2,
            )


@dataclass(frozen=True)
class CoherenceWitness:
    """Shared comparison function h with its two one-sided constants.

    C_v lower-bounds the gradient correlation by h; C_l upper-bounds the
    value gap by h. Their ratio is a curvature certificate.
    """

    h: Callable[[np.ndarray, np.ndarray], float]
    C_v: float
    C_l: float

    def __post_init__(self) -> None:
        if self.C_v <= 0 or self.C_l <= 0:
            raise ValueError("both coherence constants must be positive")


@dataclass
class CertReport:
    property: str
    holds: bool
    estimated_constant: float
    worst_point: list[float]
    worst_margin: float
    points_tested: int

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)


def sample_ball(rng: SeededRng, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    """count points uniform in the closed ball around center."""
    center = np.asarray(center, dtype=float)
    d = center.size
    raw = rng.standard_normal((count, d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * np.array([rng.uniform() for _ in range(count)]) ** (1.0 / d)
    return center + raw / norms * radii[:, None]


def default_cert_points(
    rng: SeededRng,
    w_star: np.ndarray,
    w0: np.ndarray,
    count: int = 1000,
    radius_factor: float = 3.0,
) -> np.ndarray:
    """Ball around the minimizer covering the start point with slack.

    Certification only needs to hold where iterates travel, so the
    default region is a ball of radius 3 ||w0 - w_star|| centred at the
    minimizer.
    """
    radius = radius_factor * float(np.linalg.norm(np.asarray(w0) - np.asarray(w_star)))
    if radius == 0.0:
        radius = 1.0
    return sample_ball(rng, w_star, radius, count)


def _margin_report(
    name: str,
    points: np.ndarray,
    margins: np.ndarray,
    estimated: float,
    tol: float,
) -> CertReport:
    worst = int(np.argmin(margins))
    return CertReport(
        property=name,
        holds=bool(margins[worst] >= -tol),
        estimated_constant=float(estimated),
        worst_point=[float(v) for v in points[worst]],
        worst_margin=float(margins[worst]),
        points_tested=len(points),
    )


def _as_points(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("need at least one certification point")
    return pts


def check_quasar(
    obj: Objective,
    w_star: np.ndarray,
    rho: float,
    points,
    tol: float = 1e-9,
) -> CertReport:
    """Margin <grad f(w), w-w*> - rho (f(w) - f(w*)) over the points."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    pts = _as_points(points)
    f_star = obj.f(w_star)
    margins = np.empty(len(pts))
    ratios = []
    for i, w in enumerate(pts):
        gap = obj.f(w) - f_star
        corr = float(np.dot(obj.grad(w), w - w_star))
        margins[i] = corr - rho * gap
        if gap > 1e-12 * (1.0 + abs(f_star)):
            ratios.append(max(corr / gap, 0.0))
    est = min(ratios) if ratios else math.nan
    return _margin_report("quasar", pts, margins, est, tol)


def estimate_rho(obj: Objective, w_star: np.ndarray, points) -> float:
    """Worst gradient-correlation-to-gap ratio over points above the optimum.

    Points whose value gap is below 1e-12 (1+|f*|) are skipped to avoid
    amplifying rounding noise near the minimizer.
    """
    pts = _as_points(points)
    f_star = obj.f(w_star)
    eps_f = 1e-12 * (1.0 + abs(f_star))
    best = math.inf
    used = 0
    for w in pts:
        gap = obj.f(w) - f_star
        if gap <= eps_f:
            continue
        used += 1
        ratio = float(np.dot(obj.grad(w), w - w_star)) / gap
        best = min(best, max(ratio, 0.0))
    if used == 0:
        raise ValueError("every point sits at the optimum; cannot estimate a ratio")
    return best


def check_strong_quasar(
    obj: Objective,
    w_star: np.ndarray,
    rho: float,
    mu: float,
    points,
    tol: float = 1e-9,
) -> CertReport:
    """Margin <grad f, w-w*>/rho - gap - (mu/2)||w-w*||^2."""
    if rho <= 0 or mu <= 0:
        raise ValueError("rho and mu must be positive")
    pts = _as_points(points)
    f_star = obj.f(w_star)
    margins = np.empty(len(pts))
    mu_caps = []
    for i, w in enumerate(pts):
        delta = w - w_star
        sq = float(np.dot(delta, delta))
        head = float(np.dot(obj.grad(w), delta)) / rho - (obj.f(w) - f_star)
        margins[i] = head - 0.5 * mu * sq
        if sq > 1e-18:
            mu_caps.append(2.0 * head / sq)
    est = min(mu_caps) if mu_caps else math.nan
    return _margin_report("strong-quasar", pts, margins, est, tol)


def check_one_point_convex(
    obj: Objective,
    w_star: np.ndarray,
    C_v: float,
    points,
    tol: float = 1e-9,
) -> CertReport:
    """Margin <grad f(w), w-w*> - C_v ||w-w*||^2."""
    if C_v <= 0:
        raise ValueError("C_v must be positive")
    pts = _as_points(points)
    margins = np.empty(len(pts))
    ratios = []
    for i, w in enumerate(pts):
        delta = w - w_star
        sq = float(np.dot(delta, delta))
        corr = float(np.dot(obj.grad(w), delta))
        margins[i] = corr - C_v * sq
        if sq > 1e-18:
            ratios.append(corr / sq)
    est = min(ratios) if ratios else math.nan
    return _margin_report("one-point", pts, margins, est, tol)


def check_pl(
    obj: Objective,
    f_star: float,
    nu: float,
    points,
    tol: float = 1e-9,
) -> CertReport:
    """Margin ||grad f(w)||^2 - 2 nu (f(w) - f_star)."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    pts = _as_points(points)
    margins = np.empty(len(pts))
    ratios = []
    for i, w in enumerate(pts):
        gap = obj.f(w) - f_star
        gsq = float(np.dot(obj.grad(w), obj.grad(w)))
        margins[i] = gsq - 2.0 * nu * gap
        if gap > 1e-12 * (1.0 + abs(f_star)):
            ratios.append(gsq / (2.0 * gap))
    est = min(ratios) if ratios else math.nan
    return _margin_report("pl", pts, margins, est, tol)


def check_qg(
    obj: Objective,
    w_star: np.ndarray,
    nu: float,
    points,
    tol: float = 1e-9,
) -> CertReport:
    """Margin f(w) - f(w*) - (nu/2) ||w-w*||^2."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    pts = _as_points(points)
    f_star = obj.f(w_star)
    margins = np.empty(len(pts))
    ratios = []
    for i, w in enumerate(pts):
        delta = w - w_star
        sq = float(np.dot(delta, delta))
        gap = obj.f(w) - f_star
        margins[i] = gap - 0.5 * nu * sq
        if sq > 1e-18:
            ratios.append(2.0 * gap / sq)
    est = min(ratios) if ratios else math.nan
    return _margin_report("qg", pts, margins, est, tol)


def estimate_cv(obj: Objective, w_star: np.ndarray, points) -> float:
    """Largest one-point constant supported by the sample."""
    pts = _as_points(points)
    best = math.inf
    for w in pts:
        delta = w - w_star
        sq = float(np.dot(delta, delta))
        if sq <= 1e-18:
            continue
        best = min(best, float(np.dot(obj.grad(w), delta)) / sq)
    if not math.isfinite(best):
        raise ValueError("every point coincides with the minimizer")
    return best


def estimate_qg_nu(obj: Objective, w_star: np.ndarray, points) -> float:
    """Largest quadratic-growth constant supported by the sample."""
    pts = _as_points(points)
    f_star = obj.f(w_star)
    best = math.inf
    for w in pts:
        delta = w - w_star
        sq = float(np.dot(delta, delta))
        if sq <= 1e-18:
            continue
        best = min(best, 2.0 * (obj.f(w) - f_star) / sq)
    if not math.isfinite(best):
        raise ValueError("every point coincides with the minimizer")
    return best


def verify_coherence_witness(
    obj: Objective,
    w_star: np.ndarray,
    witness: CoherenceWitness,
    points,
    tol: float = 1e-9,
) -> tuple[CertReport, CertReport]:
    """Check both defining inequalities of a coherence pair on the points."""
    pts = _as_points(points)
    f_star = obj.f(w_star)
    lower = np.empty(len(pts))
    upper = np.empty(len(pts))
    for i, w in enumerate(pts):
        h = witness.h(w, w_star)
        if h < -1e-12:
            raise ValueError("comparison function must be nonnegative")
        lower[i] = float(np.dot(obj.grad(w), w - w_star)) - witness.C_v * h
        upper[i] = witness.C_l * h - (obj.f(w) - f_star)
    return (
        _margin_report("coherence-lower", pts, lower, witness.C_v, tol),
        _margin_report("coherence-upper", pts, upper, witness.C_l, tol),
    )


# -- constant conversions ----------------------------------------------------


def coherence_to_quasar(C_v: float, C_l: float) -> float:
    """Curvature ratio implied by a coherence pair."""
    if C_v <= 0 or C_l <= 0:
        raise ValueError("coherence constants must be positive")
    return C_v / C_l


def glm_quasar_constant(alpha: float, L0: float) -> float:
    """2 alpha^2 / L0^2 for an alpha-increasing, L0-Lipschitz link."""
    if alpha <= 0 or L0 <= 0:
        raise ValueError("alpha and L0 must be positive")
    return 2.0 * alpha**2 / L0**2


def one_point_to_strong_quasar(rho_hat: float, C_v: float, theta: float) -> tuple[float, float]:
    """Strong form from a one-point certificate: (rho_hat/theta, 2 C_v (theta-1)/rho_hat)."""
    if theta <= 1:
        raise ValueError("theta must exceed 1")
    if rho_hat <= 0 or C_v <= 0:
        raise ValueError("rho_hat and C_v must be positive")
    return rho_hat / theta, 2.0 * C_v * (theta - 1.0) / rho_hat


def qg_to_strong_quasar(rho_hat: float, nu: float, theta: float) -> tuple[float, float]:
    """Strong form from a quadratic-growth certificate: (rho_hat theta, nu (1-theta)/theta)."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if rho_hat <= 0 or nu <= 0:
        raise ValueError("rho_hat and nu must be positive")
    return rho_hat * theta, nu * (1.0 - theta) / theta


def glm_qg_constant(alpha: float, lambda_min: float) -> float:
    """alpha^2 lambda_min: growth constant of an increasing-link GLM risk."""
    if alpha <= 0 or lambda_min <= 0:
        raise ValueError("alpha and lambda_min must be positive")
    return alpha**2 * lambda_min


def relu_gen_smooth_constant(problem: GlmProblem) -> float:
    """Half the mean squared sample norm; the relu-link value-gap constant."""
    return float(0.5 * np.mean(np.einsum("ij,ij->i", problem.X, problem.X)))


def phase_retrieval_cr(
    problem: GlmProblem,
    radius: float,
    mc_points: int,
    rng: SeededRng,
) -> float:
    """Worst fourth-moment bound over two balls around +-w_star.

    For each candidate w (mc_points per ball, plus both centers) the
    empirical expectation of ((w + w_star)^T x)^2 ||x||^2 over the
    dataset is evaluated; the max is a value-gap constant for the
    quadratic link on that region.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    X = problem.X
    sq_norms = np.einsum("ij,ij->i", X, X)
    candidates = [problem.w_star.copy(), -problem.w_star]
    if radius > 0 and mc_points > 0:
        candidates.append(sample_ball(rng, problem.w_star, radius, mc_points))
        candidates.append(sample_ball(rng, -problem.w_star, radius, mc_points))
    ws = np.vstack([np.atleast_2d(c) for c in candidates])
    best = 0.0
    for w in ws:
        proj = X @ (w + problem.w_star)
        best = max(best, float(np.mean(proj**2 * sq_norms)))
    return best


def estimate_smoothness_L(obj: Objective, pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> float:
    """Largest gradient difference quotient over the sampled pairs."""
    best = 0.0
    used = 0
    for x, y in pairs:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dist = float(np.linalg.norm(x - y))
        if dist <= 1e-15:
            continue
        used += 1
        best = max(best, float(np.linalg.norm(obj.grad(x) - obj.grad(y))) / dist)
    if used == 0:
        raise ValueError("need at least one pair of distinct points")
    return best
