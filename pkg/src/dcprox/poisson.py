"""Compressed sensing of photon counts under a Kullback-Leibler data term.

Model: minimize KL(b, A x + bg) + lam ||x||_1 - lam ||x||_2 over x >= 0,
where KL(b, c) = sum_i b_i log(b_i / c_i) + c_i - b_i (a zero count
contributes just c_i).  The nonnegativity constraint rides inside the
proximable term, so the prox is a one-sided soft threshold.  The gradient
splits as -grad KL = U - V with U = A^T (b / (A x + bg)) >= 0 and
V = A^T 1 > 0, which feeds the split-gradient metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .logreg import l2_concave
from .metric import DiagonalMetric
from .problem import (DcProblem, EvaluationDomainError, ProximableOracle,
                      SmoothOracle, nonnegative_orthant)

Array = np.ndarray


@dataclass(frozen=True)
class PoissonCsData:
    """Nonnegative sensing matrix, observed counts, background, penalty."""

    A: Array
    b: Array
    bg: float = 1e-10
    lam: float = 1e-3

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if np.any(A < 0.0):
            raise ValueError("sensing matrix must be componentwise nonnegative")
        if np.any(b < 0.0):
            raise ValueError("counts must be nonnegative")
        if A.shape[0] != b.shape[0]:
            raise ValueError("count vector must match the number of rows")
        if self.bg <= 0.0:
            raise ValueError("background must be positive")
        if self.lam < 0.0:
            raise ValueError("penalty weight must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def _intensity(data: PoissonCsData, x: Array) -> Array:
    if np.any(x < 0.0):
        raise EvaluationDomainError("KL term evaluated at a negative point")
    c = data.A @ x + data.bg
    if np.any(c <= 0.0):
        raise EvaluationDomainError("model intensity is not strictly positive")
    return c


def kl_value_grad(data: PoissonCsData, x: Array) -> tuple[float, Array]:
    """KL divergence between counts and model intensity, with its gradient.

    value = sum_i b_i log(b_i / c_i) + c_i - b_i with c = A x + bg; terms with
    b_i = 0 contribute c_i.  grad = A^T (1 - b / c).
    """
    c = _intensity(data, x)
    b = data.b
    pos = b > 0.0
    value = float(np.sum(c) - np.sum(b)
                  + np.sum(b[pos] * np.log(b[pos] / c[pos])))
    grad = data.A.T @ (1.0 - b / c)
    return value, grad


def kl_split(data: PoissonCsData, x: Array) -> tuple[Array, Array]:
    """Split -grad KL(x) = U - V into U = A^T(b/c) >= 0 and V = A^T 1 > 0.

    Raises when some column of A is identically zero, since V must be
    strictly positive for the split-gradient metric.
    """
    c = _intensity(data, x)
    U = data.A.T @ (data.b / c)
    V = data.A.T @ np.ones(data.m)
    if np.any(V <= 0.0):
        raise ValueError("sensing matrix has a zero column; split undefined")
    return U, V


def l1_nonneg_scaled_prox(v: Array, t: float, lam: float,
                          D: DiagonalMetric | None = None) -> Array:
    """One-sided soft threshold max(v - t*lam/D, 0).

    Solves argmin_{u >= 0} lam sum(u) + ||u - v||_D^2 / (2 t) coordinatewise.
    """
    if t <= 0.0 or lam < 0.0:
        raise ValueError("need t > 0 and lam >= 0")
    level = t * lam if D is None else t * lam / D.diag
    return np.maximum(v - level, 0.0)


def l1_nonneg_proximable(lam: float) -> ProximableOracle:
    """g(x) = lam ||x||_1 + indicator(x >= 0)."""

    def value(x: Array) -> float:
        if np.any(x < 0.0):
            return math.inf
        return float(lam * np.sum(x))

    return ProximableOracle(
        eval=value,
        scaled_prox=lambda v, t, D: l1_nonneg_scaled_prox(v, t, lam, D))


def build_poisson_problem(data: PoissonCsData) -> DcProblem:
    """Assemble the composite problem; the intensity pass is shared between
    value, gradient, and split calls at the same point."""

    cache = {"x": None, "c": None}

    def intensity(x: Array) -> Array:
        if cache["x"] is not None and x.shape == cache["x"].shape \
                and np.array_equal(x, cache["x"]):
            return cache["c"]
        c = _intensity(data, x)
        cache["x"] = x.copy()
        cache["c"] = c
        return c

    b = data.b
    pos = b > 0.0
    b_pos = b[pos]
    col_sums = data.A.T @ np.ones(data.m)
    if np.any(col_sums <= 0.0):
        raise ValueError("sensing matrix has a zero column")

    def value(x: Array) -> float:
        c = intensity(x)
        return float(np.sum(c) - np.sum(b) + np.sum(b_pos * np.log(b_pos / c[pos])))

    def grad(x: Array) -> Array:
        c = intensity(x)
        return data.A.T @ (1.0 - b / c)

    def split(x: Array) -> tuple[Array, Array]:
        c = intensity(x)
        return data.A.T @ (b / c), col_sums

    return DcProblem(f=SmoothOracle(eval=value, grad=grad),
                     g=l1_nonneg_proximable(data.lam),
                     h=l2_concave(data.lam),
                     feasible_set=nonnegative_orthant(),
                     lower_bound_hint=0.0,
                     grad_split=split)
