"""Sparse logistic regression with an l1-minus-l2 penalty.

Model: minimize (1/m) sum_i log(1 + exp(-b_i <a_i, x>)) + lam ||x||_1
               - lam ||x||_2 over the whole space.  The smooth part is the
averaged logistic loss, the proximable part the l1 term, and the subtracted
concave part the l2 norm, so the penalty vanishes on one-sparse vectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .metric import DiagonalMetric
from .problem import (ConcavePartOracle, DcProblem, ProximableOracle,
                      SmoothOracle, whole_space)

Array = np.ndarray


@dataclass(frozen=True)
class LogRegData:
    """Design matrix (dense or CSR), labels in {-1, +1}, penalty weight."""

    A: object  # (m, n) ndarray or scipy.sparse.csr_matrix
    b: Array
    lam: float

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if not np.all(np.isin(b, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if self.A.shape[0] != b.shape[0]:
            raise ValueError("label count must match the number of rows")
        if self.lam <= 0.0:
            raise ValueError("penalty weight must be positive")
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def _softplus(z: Array) -> Array:
    # log(1 + exp(z)) without overflow: max(z, 0) + log1p(exp(-|z|)).
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def logistic_value_grad(data: LogRegData, x: Array) -> tuple[float, Array]:
    """Averaged logistic loss and its gradient at x.

    value = (1/m) sum_i log(1 + exp(-b_i <a_i, x>)),
    grad  = -(1/m) A^T (b * sigmoid(-b * A x)).
    """
    margins = data.A @ x
    z = -data.b * margins
    value = float(np.mean(_softplus(z)))
    grad = -(data.A.T @ (data.b * expit(z))) / data.m
    return value, np.asarray(grad)


def l1_scaled_prox(v: Array, t: float, lam: float,
                   D: DiagonalMetric | None = None) -> Array:
    """Soft threshold with per-coordinate level t*lam/D_i.

    Solves argmin_u lam ||u||_1 + ||u - v||_D^2 / (2 t) coordinatewise.
    """
    if t <= 0.0 or lam < 0.0:
        raise ValueError("need t > 0 and lam >= 0")
    level = t * lam if D is None else t * lam / D.diag
    return np.sign(v) * np.maximum(np.abs(v) - level, 0.0)


def l2_subgradient(x: Array, lam: float) -> Array:
    """lam * x / ||x||, with the zero vector selected at the origin."""
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        return np.zeros_like(x)
    return lam * x / nrm


def _frobenius_sq(A) -> float:
    if sp.issparse(A):
        return float(np.dot(A.data, A.data))
    return float(np.sum(A * A))


def logistic_lipschitz_bound(data: LogRegData, tol: float = 1e-8,
                             max_iter: int = 1000) -> float:
    """Global curvature bound lambda_max(A^T A) / (4 m) by power iteration.

    The start vector is a fixed pseudo-random direction so ties with the
    deterministic all-ones vector cannot hide the top eigenvalue.  If the
    Rayleigh quotient has not settled to relative tolerance ``tol`` within
    ``max_iter`` rounds, falls back to the coarser Frobenius bound
    ||A||_F^2 / (4 m) with a warning.
    """
    A = data.A
    m, n = A.shape
    rng = np.random.Generator(np.random.Philox(0))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iter):
        u = A.T @ (A @ v)
        u = np.asarray(u)
        nrm = float(np.linalg.norm(u))
        if nrm == 0.0:
            return 0.0  # A annihilates the iterate; spectrum is 0 on its span
        lam = float(np.dot(v, u))
        v = u / nrm
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam / (4.0 * m)
        lam_prev = lam
    warnings.warn("power iteration stagnated; using the Frobenius bound",
                  RuntimeWarning, stacklevel=2)
    return _frobenius_sq(A) / (4.0 * m)


def l1_proximable(lam: float) -> ProximableOracle:
    """g(x) = lam ||x||_1 with its scaled soft-threshold prox."""
    return ProximableOracle(
        eval=lambda x: float(lam * np.sum(np.abs(x))),
        scaled_prox=lambda v, t, D: l1_scaled_prox(v, t, lam, D))


def l2_concave(lam: float) -> ConcavePartOracle:
    """h(x) = lam ||x||_2 with the deterministic subgradient selection."""
    return ConcavePartOracle(
        eval=lambda x: float(lam * np.linalg.norm(x)),
        subgrad=lambda x: l2_subgradient(x, lam))


def _cached(forward):
    """Memoize a matrix-vector forward pass on the most recent argument."""
    cache = {"x": None, "out": None}

    def wrapped(x: Array):
        if cache["x"] is not None and x.shape == cache["x"].shape \
                and np.array_equal(x, cache["x"]):
            return cache["out"]
        out = forward(x)
        cache["x"] = x.copy()
        cache["out"] = out
        return out

    return wrapped


def build_logreg_problem(data: LogRegData) -> DcProblem:
    """Assemble the composite problem; the forward pass is shared between
    value and gradient calls at the same point."""

    margins_at = _cached(lambda x: data.A @ x)

    def value(x: Array) -> float:
        return float(np.mean(_softplus(-data.b * margins_at(x))))

    def grad(x: Array) -> Array:
        s = expit(-data.b * margins_at(x))
        return -np.asarray(data.A.T @ (data.b * s)) / data.m

    return DcProblem(f=SmoothOracle(eval=value, grad=grad),
                     g=l1_proximable(data.lam),
                     h=l2_concave(data.lam),
                     feasible_set=whole_space(),
                     lower_bound_hint=0.0)
