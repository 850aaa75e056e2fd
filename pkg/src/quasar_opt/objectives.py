"""GLM square-loss objectives, pseudo-gradients and synthetic problems.

A problem is a design matrix X with exact labels y_i = sigma(w_star . x_i),
so the generating vector is a global minimizer with zero empirical risk.
The empirical risk, its gradient, the per-sample pseudo-gradient and the
moment constants used by the stochastic recovery algorithms all live here.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .event_clock import SeededRng
from .links import LinkFunction, make_link, secant_slope

__all__ = [
    "GlmProblem",
    "Objective",
    "EvalCounter",
    "counted_objective",
    "generate_problem",
    "initial_point",
    "empirical_objective",
    "pseudo_gradient",
    "empirical_h_matrix",
    "estimate_glm_constants",
    "quadratic_objective",
    "save_problem",
    "load_problem",
]


@dataclass(frozen=True)
class GlmProblem:
    """Synthetic GLM dataset with its generating vector."""

    X: np.ndarray  # (n, d), one sample per row
    y: np.ndarray  # (n,)
    w_star: np.ndarray  # (d,)
    link: LinkFunction

    def __post_init__(self) -> None:
        n, d = self.X.shape
        if n < 1 or d < 1:
            raise ValueError("need at least one sample and one dimension")
        if self.y.shape != (n,) or self.w_star.shape != (d,):
            raise ValueError("inconsistent shapes between X, y and w_star")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass
class Objective:
    """A differentiable objective: value, gradient, dimension.

    smoothness_L, when known, is the gradient Lipschitz constant used to
    pick default step sizes.
    """

    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    dim: int
    smoothness_L: float | None = None


@dataclass
class EvalCounter:
    """Running totals of oracle calls charged to one algorithm run."""

    grad_calls: int = 0
    func_calls: int = 0


def counted_objective(obj: Objective, counter: EvalCounter) -> Objective:
    """View of obj whose evaluations increment counter.

    Algorithms step through the counted view; trace metrics read the raw
    objective so bookkeeping never inflates the reported oracle cost.
    """

    def f(w):
        counter.func_calls += 1
        return obj.f(w)

    def grad(w):
        counter.grad_calls += 1
        return obj.grad(w)

    return Objective(f=f, grad=grad, dim=obj.dim, smoothness_L=obj.smoothness_L)


def generate_problem(rng: SeededRng, n: int, d: int, link: LinkFunction) -> GlmProblem:
    """Sample X and w_star from standard normals and label exactly.

    Labels are produced row by row with the same dot-product primitive the
    per-sample surrogate gradient uses, so that surrogate residuals vanish
    bit-exactly at the generating vector (a BLAS matrix-vector product can
    differ from the row dot in the last ulp).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    X = rng.standard_normal((n, d))
    w_star = rng.standard_normal(d)
    y = np.array([float(link.eval(np.dot(X[i], w_star))) for i in range(n)])
    return GlmProblem(X=X, y=y, w_star=w_star, link=link)


def initial_point(rng: SeededRng, d: int) -> np.ndarray:
    """Close-to-zero start: 1e-2 times a standard normal vector."""
    if d < 1:
        raise ValueError("d must be positive")
    return 1e-2 * rng.standard_normal(d)


def empirical_objective(problem: GlmProblem) -> Objective:
    """Mean square loss over the dataset and its exact gradient."""
    X, y, link = problem.X, problem.y, problem.link
    n = problem.n

    def f(w: np.ndarray) -> float:
        r = link.eval(X @ w) - y
        return float(0.5 * np.dot(r, r) / n)

    def grad(w: np.ndarray) -> np.ndarray:
        z = X @ w
        r = link.eval(z) - y
        return (X.T @ (r * link.deriv(z))) / n

    return Objective(f=f, grad=grad, dim=problem.d)


def pseudo_gradient(problem: GlmProblem, w: np.ndarray, sample_index: int) -> np.ndarray:
    """(sigma(w.x_i) - y_i) x_i for one sample.

    The residual is not rescaled by sigma', which is what makes this a
    descent-correlated surrogate for the distance-to-target objective
    rather than the per-sample risk gradient.
    """
    if not 0 <= sample_index < problem.n:
        raise IndexError(f"sample_index {sample_index} out of range [0, {problem.n})")
    x = problem.X[sample_index]
    resid = float(problem.link.eval(np.dot(x, w)) - problem.y[sample_index])
    return resid * x


def empirical_h_matrix(problem: GlmProblem, w: np.ndarray) -> np.ndarray:
    """Secant-weighted second-moment matrix of the data at w.

    (1/n) sum_i psi(w.x_i, w_star.x_i) x_i x_i^T, where psi is the secant
    slope of the link between the two projections.
    """
    psi = secant_slope(problem.link, problem.X @ w, problem.X @ problem.w_star)
    return (problem.X.T * psi) @ problem.X / problem.n


def estimate_glm_constants(
    problem: GlmProblem,
    mc_samples: int,
    rng: SeededRng,
    w: np.ndarray | None = None,
) -> tuple[float, float, float]:
    """Monte-Carlo estimates (mu, R2, kappa_tilde) at a reference point.

    Draws one fresh standard-normal sample of size mc_samples and builds
    every matrix from it: the plain second moment (whose smallest
    eigenvalue times alpha gives mu), the secant-weighted moment H, and
    the two fourth-moment style matrices that H must dominate. R2 and
    kappa_tilde are the largest eigenvalues of the H^{-1/2}-whitened
    dominated matrices. Since the secant weight is at least alpha
    pointwise, kappa_tilde <= R2/mu holds for the shared sample and is
    asserted.
    """
    alpha = problem.link.increase_alpha
    if alpha <= 0:
        raise ValueError(
            "constants can only be estimated for links with a positive "
            "increase constant; supply them manually otherwise"
        )
    d = problem.d
    if mc_samples < d:
        raise ValueError("need at least d Monte-Carlo samples")
    if w is None:
        w = np.zeros(d)

    Xs = rng.standard_normal((mc_samples, d))
    psi = secant_slope(problem.link, Xs @ w, Xs @ problem.w_star)
    sq_norms = np.einsum("ij,ij->i", Xs, Xs)

    second_moment = Xs.T @ Xs / mc_samples
    theta_hat = float(np.linalg.eigvalsh(second_moment)[0])
    mu = alpha * theta_hat

    H = (Xs.T * psi) @ Xs / mc_samples
    h_vals, h_vecs = np.linalg.eigh(H)
    if h_vals[0] <= 1e-12 * max(1.0, h_vals[-1]):
        raise np.linalg.LinAlgError("secant-weighted moment matrix is rank deficient")
    h_inv_sqrt = (h_vecs / np.sqrt(h_vals)) @ h_vecs.T
    h_inv = (h_vecs / h_vals) @ h_vecs.T

    m_r = (Xs.T * (psi**2 * sq_norms)) @ Xs / mc_samples
    r2 = float(np.linalg.eigvalsh(h_inv_sqrt @ m_r @ h_inv_sqrt)[-1])

    h_norms = np.einsum("ij,jk,ik->i", Xs, h_inv, Xs)
    m_k = (Xs.T * (psi**2 * h_norms)) @ Xs / mc_samples
    kappa_tilde = float(np.linalg.eigvalsh(h_inv_sqrt @ m_k @ h_inv_sqrt)[-1])

    if kappa_tilde > r2 / mu * (1 + 1e-8) + 1e-12:
        raise AssertionError(
            f"kappa_tilde={kappa_tilde} exceeds R2/mu={r2 / mu}; "
            "estimation is inconsistent"
        )
    return mu, r2, kappa_tilde


def quadratic_objective(eigenvalues: np.ndarray, w_star: np.ndarray | None = None) -> Objective:
    """Diagonal quadratic 0.5 (w-w*)^T diag(lam) (w-w*), a shared test fixture."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    d = lam.size
    target = np.zeros(d) if w_star is None else np.asarray(w_star, dtype=float)

    def f(w):
        delta = w - target
        return float(0.5 * np.dot(lam * delta, delta))

    def grad(w):
        return lam * (w - target)

    return Objective(f=f, grad=grad, dim=d, smoothness_L=float(lam.max()))


# -- problem files ----------------------------------------------------------
#
# One CSV (header: j,x_1..x_d,y) plus a JSON sidecar holding n, d, the link
# and the generating vector. Floats are written with repr so a load
# reproduces every bit of the arrays.


def _fmt(x: float) -> str:
    return repr(float(x))


def save_problem(problem: GlmProblem, csv_path: str | Path, seed: int | None = None) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    header = ["j"] + [f"x_{j + 1}" for j in range(problem.d)] + ["y"]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(problem.n):
            writer.writerow(
                [str(i)] + [_fmt(v) for v in problem.X[i]] + [_fmt(problem.y[i])]
            )
    sidecar = csv_path.with_suffix(".json")
    meta = {
        "n": problem.n,
        "d": problem.d,
        "link": problem.link.kind,
        "alpha": problem.link.param if problem.link.kind == "leaky_relu" else problem.link.increase_alpha,
        "seed": seed,
        "w_star": [float(v) for v in problem.w_star],
    }
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return sidecar


def load_problem(csv_path: str | Path) -> GlmProblem:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    link = make_link(meta["link"], meta["alpha"] if meta["link"] == "leaky_relu" else None)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 2
        rows = list(reader)
    X = np.empty((len(rows), d))
    y = np.empty(len(rows))
    for i, row in enumerate(rows):
        X[i] = [float(v) for v in row[1 : 1 + d]]
        y[i] = float(row[-1])
    if meta["n"] != len(rows) or meta["d"] != d:
        raise ValueError("sidecar metadata disagrees with the CSV contents")
    return GlmProblem(X=X, y=y, w_star=np.array(meta["w_star"]), link=link)
