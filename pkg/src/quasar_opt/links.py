"""Scalar link functions for generalized linear models.

Each link carries its almost-everywhere derivative, a Lipschitz constant
and an "increase" constant: the largest alpha with sigma'(z) >= alpha
everywhere. Links that are not increasing everywhere (relu, quadratic,
logistic on unbounded inputs) carry increase_alpha = 0 and the moment
constants that depend on it must be supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LinkFunction",
    "identity_link",
    "logistic_link",
    "relu_link",
    "leaky_relu_link",
    "quadratic_link",
    "make_link",
    "secant_slope",
]


@dataclass(frozen=True)
class LinkFunction:
    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    lipschitz_L0: float  # math.inf when unbounded
    increase_alpha: float
    param: float | None = None  # slope for leaky_relu, otherwise None

    def __call__(self, z):
        return self.eval(z)


def identity_link() -> LinkFunction:
    return LinkFunction(
        kind="identity",
        eval=lambda z: np.asarray(z, dtype=float),
        deriv=lambda z: np.ones_like(np.asarray(z, dtype=float)),
        lipschitz_L0=1.0,
        increase_alpha=1.0,
    )


def logistic_link() -> LinkFunction:
    def _eval(z):
        return 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=float)))

    def _deriv(z):
        s = _eval(z)
        return s * (1.0 - s)

    # sigma' tends to 0 at +-inf, so there is no global increase constant;
    # a positive one only exists after restricting to bounded inputs.
    return LinkFunction(
        kind="logistic",
        eval=_eval,
        deriv=_deriv,
        lipschitz_L0=0.25,
        increase_alpha=0.0,
    )


def relu_link() -> LinkFunction:
    # derivative at the kink is set to 0 (the leaky slope with alpha=0);
    # finite-difference checks must stay clear of z=0.
    return LinkFunction(
        kind="relu",
        eval=lambda z: np.maximum(np.asarray(z, dtype=float), 0.0),
        deriv=lambda z: (np.asarray(z, dtype=float) > 0).astype(float),
        lipschitz_L0=1.0,
        increase_alpha=0.0,
    )


def leaky_relu_link(alpha: float) -> LinkFunction:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"leaky_relu slope must be in (0, 1], got {alpha}")

    def _eval(z):
        z = np.asarray(z, dtype=float)
        return np.maximum(alpha * z, z)

    def _deriv(z):
        z = np.asarray(z, dtype=float)
        return np.where(z > 0, 1.0, alpha)

    return LinkFunction(
        kind="leaky_relu",
        eval=_eval,
        deriv=_deriv,
        lipschitz_L0=1.0,
        increase_alpha=alpha,
        param=alpha,
    )


def quadratic_link() -> LinkFunction:
    # sigma(z) = z^2: not Lipschitz on the line and not increasing, so
    # both constants are degenerate; recovery-style constants are
    # user-supplied for this link.
    return LinkFunction(
        kind="quadratic",
        eval=lambda z: np.square(np.asarray(z, dtype=float)),
        deriv=lambda z: 2.0 * np.asarray(z, dtype=float),
        lipschitz_L0=math.inf,
        increase_alpha=0.0,
    )


_FACTORIES = {
    "identity": identity_link,
    "logistic": logistic_link,
    "relu": relu_link,
    "quadratic": quadratic_link,
}


def make_link(kind: str, alpha: float | None = None) -> LinkFunction:
    """Construct a link by name; leaky_relu requires its slope."""
    if kind == "leaky_relu":
        if alpha is None:
            raise ValueError("leaky_relu needs a slope parameter")
        return leaky_relu_link(alpha)
    try:
        return _FACTORIES[kind]()
    except KeyError:
        raise ValueError(f"unknown link kind: {kind!r}") from None


def secant_slope(link: LinkFunction, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(sigma(a)-sigma(b))/(a-b), with the diagonal a==b filled by sigma'(a).

    The diagonal convention removes the 0/0 singularity so the secant
    weight is defined at the target as well.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = a - b
    near = np.abs(diff) < 1e-12 * (1.0 + np.abs(a) + np.abs(b))
    safe = np.where(near, 1.0, diff)
    slope = (link.eval(a) - link.eval(b)) / safe
    return np.where(near, link.deriv(a), slope)
