"""Composite model F(x) = f(x) + g(x) - h(x) over a feasible set.

f is smooth convex, g is closed convex with an inexpensive (scaled) proximal
map, h is convex and continuous, and dom g is contained in a closed convex set
Y on which f is smooth.  Oracles are plain records of callables so problems
can be assembled from closed-form pieces without subclassing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .metric import DiagonalMetric

Array = np.ndarray


class EvaluationDomainError(ValueError):
    """The smooth term was evaluated outside the interior of its domain.

    Feasible iterates never trigger this, so it is raised as a hard error
    rather than reported as an infinite objective value.
    """


@dataclass(frozen=True)
class SmoothOracle:
    """Value and gradient of the smooth convex term.

    Both callables must be finite on the feasible set and deterministic:
    equal inputs give equal outputs.
    """

    eval: Callable[[Array], float]
    grad: Callable[[Array], Array]
    domain_hint: Optional["FeasibleSet"] = None


@dataclass(frozen=True)
class ProximableOracle:
    """g together with its scaled proximal map.

    ``scaled_prox(v, t, D)`` returns argmin_u g(u) + ||u - v||_D^2 / (2 t)
    for a positive diagonal D (``None`` means identity).  ``eval`` may return
    +inf outside dom g.
    """

    eval: Callable[[Array], float]
    scaled_prox: Callable[[Array, float, Optional[DiagonalMetric]], Array]


@dataclass(frozen=True)
class ConcavePartOracle:
    """The subtracted convex term h with a deterministic subgradient selection."""

    eval: Callable[[Array], float]
    subgrad: Callable[[Array], Array]
    is_zero: bool = False


@dataclass(frozen=True)
class FeasibleSet:
    """Closed convex constraint set of a supported separable kind.

    Supported kinds are componentwise separable, so the scaled projection is
    independent of any diagonal metric; the metric argument exists for
    interface parity and is checked against nothing.
    """

    kind: str  # whole-space | nonnegative-orthant | box
    lo: Array | float | None = None
    hi: Array | float | None = None

    def __post_init__(self):
        if self.kind not in ("whole-space", "nonnegative-orthant", "box"):
            raise ValueError(f"unsupported feasible set kind: {self.kind!r}")
        if self.kind == "box":
            if self.lo is None or self.hi is None:
                raise ValueError("box set needs lo and hi")
            if np.any(np.asarray(self.lo) > np.asarray(self.hi)):
                raise ValueError("box set needs lo <= hi")

    def scaled_project(self, v: Array, metric: DiagonalMetric | None = None) -> Array:
        if self.kind == "whole-space":
            return v
        if self.kind == "nonnegative-orthant":
            return np.maximum(v, 0.0)
        return np.clip(v, self.lo, self.hi)

    def contains(self, v: Array) -> bool:
        if self.kind == "whole-space":
            return True
        if self.kind == "nonnegative-orthant":
            return bool(np.all(v >= 0.0))
        return bool(np.all(v >= self.lo) and np.all(v <= self.hi))


def whole_space() -> FeasibleSet:
    return FeasibleSet("whole-space")


def nonnegative_orthant() -> FeasibleSet:
    return FeasibleSet("nonnegative-orthant")


def box(lo, hi) -> FeasibleSet:
    return FeasibleSet("box", lo=lo, hi=hi)


@dataclass(frozen=True)
class DcProblem:
    """Problem record bundling the three terms and the feasible set.

    ``grad_split``, when present, maps x to a pair (U, V) of nonnegative and
    strictly positive vectors with U - V = -grad f(x); it feeds the
    split-gradient metric strategy.  ``lower_bound_hint`` is metadata only.
    """

    f: SmoothOracle
    g: ProximableOracle
    h: ConcavePartOracle
    feasible_set: FeasibleSet
    lower_bound_hint: float | None = None
    grad_split: Callable[[Array], Tuple[Array, Array]] | None = None


def objective(problem: DcProblem, x: Array) -> float:
    """F(x) = f(x) + g(x) - h(x); +inf when x is outside dom g.

    Domain violations of f raise EvaluationDomainError instead of returning
    +inf, since the solvers never evaluate f at such points.
    """
    gx = problem.g.eval(x)
    if gx == math.inf:
        return math.inf
    return float(problem.f.eval(x)) + float(gx) - float(problem.h.eval(x))


def criticality_residual(problem: DcProblem, x: Array, t: float) -> float:
    """Norm of the fixed-point displacement of one unscaled proximal step.

    Returns ||x - prox_{t g}(x - t (grad f(x) - h'(x)))|| with the identity
    metric; zero exactly at critical points for any t > 0.
    """
    if t <= 0.0:
        raise ValueError("step size must be positive")
    step = x - t * (problem.f.grad(x) - problem.h.subgrad(x))
    x_hat = problem.g.scaled_prox(step, t, None)
    return float(np.linalg.norm(x - x_hat))


# --- common closed-form pieces -------------------------------------------

def zero_concave() -> ConcavePartOracle:
    return ConcavePartOracle(eval=lambda x: 0.0, subgrad=np.zeros_like, is_zero=True)


def zero_proximable() -> ProximableOracle:
    return ProximableOracle(eval=lambda x: 0.0, scaled_prox=lambda v, t, D: v)


def quadratic_smooth(center: Array, curvature: float = 1.0) -> SmoothOracle:
    """f(x) = curvature/2 * ||x - center||^2."""
    c = np.asarray(center, dtype=float)
    L = float(curvature)

    def value(x: Array) -> float:
        d = x - c
        return 0.5 * L * float(np.dot(d, d))

    return SmoothOracle(eval=value, grad=lambda x: L * (x - c))


def least_squares_smooth(A: Array, y: Array) -> SmoothOracle:
    """f(x) = 1/2 ||A x - y||^2."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)

    def value(x: Array) -> float:
        r = A @ x - y
        return 0.5 * float(np.dot(r, r))

    return SmoothOracle(eval=value, grad=lambda x: A.T @ (A @ x - y))
