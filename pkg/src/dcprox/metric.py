"""Diagonal variable metrics and their update schedules.

A metric here is a positive diagonal matrix D that reshapes the norm used by
the proximal step, the projection, and the line-search acceptance test.  Every
schedule confines its diagonals to the shrinking band [1/gamma_k, gamma_k], so
the metrics stay uniformly bounded and their relative growth is summable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Array = np.ndarray

DEFAULT_CLAMP_NUMERATOR = 1e13
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class DiagonalMetric:
    """Positive diagonal matrix stored as its diagonal vector."""

    diag: Array

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        if d.ndim != 1:
            raise ValueError("metric diagonal must be a 1-d vector")
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise ValueError("metric diagonal entries must be positive and finite")
        object.__setattr__(self, "diag", d)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def norm_sq(self, v: Array) -> float:
        """Squared weighted norm sum_i diag_i * v_i**2."""
        return float(np.dot(self.diag, v * v))


def weighted_norm_sq(v: Array, metric: DiagonalMetric | None) -> float:
    """``metric.norm_sq(v)``, with ``None`` meaning the identity metric."""
    if metric is None:
        return float(np.dot(v, v))
    return metric.norm_sq(v)


def identity_metric(n: int) -> DiagonalMetric:
    return DiagonalMetric(np.ones(n))


def gamma(k: int, clamp_numerator: float) -> float:
    """Clamp-band edge sqrt(1 + clamp_numerator/(k+1)^2), decreasing to 1.

    Defined for outer iteration counters k >= 1.
    """
    if k < 1:
        raise ValueError("iteration counter must be >= 1")
    return math.sqrt(1.0 + clamp_numerator / float(k + 1) ** 2)


def _clamp_band(values: Array, k: int, clamp_numerator: float) -> Array:
    # max(lower, min(upper, value)) componentwise; lower = 1/gamma <= 1 <= gamma.
    g = gamma(k, clamp_numerator)
    return np.maximum(1.0 / g, np.minimum(g, values))


@dataclass
class MetricSchedule:
    """Mutable state for a metric update strategy; owned by one solver run.

    ``accumulator`` carries the running sum of squared gradients for the
    adagrad strategy and stays ``None`` for the others.
    """

    strategy: str = "identity"  # identity | adagrad | split-gradient
    epsilon: float = DEFAULT_EPSILON
    clamp_numerator: float = DEFAULT_CLAMP_NUMERATOR
    accumulator: Array | None = None


def adagrad_metric(schedule: MetricSchedule, k: int, g_k: Array) -> DiagonalMetric:
    """Gradient-history diagonal, updated in place.

    Adds ``g_k * g_k`` to the schedule accumulator, then returns the diagonal
    clamp(sqrt(accumulator + epsilon)) restricted to [1/gamma_k, gamma_k].
    The accumulator therefore includes the current gradient.
    """
    g_k = np.asarray(g_k, dtype=float)
    if schedule.accumulator is None:
        schedule.accumulator = np.zeros_like(g_k)
    schedule.accumulator = schedule.accumulator + g_k * g_k
    d = np.sqrt(schedule.accumulator + schedule.epsilon)
    return DiagonalMetric(_clamp_band(d, k, schedule.clamp_numerator))


def split_gradient_metric(k: int, y_k: Array, V: Array, clamp_numerator: float) -> DiagonalMetric:
    """Inverse clamped ratio diag(clamp(y/V))^{-1}.

    V must be strictly positive.  The clamp applies to the ratio y/V first and
    the inversion to the clamped value, so zero coordinates of y land exactly
    on the upper diagonal bound gamma_k.
    """
    y_k = np.asarray(y_k, dtype=float)
    V = np.asarray(V, dtype=float)
    if y_k.shape != V.shape:
        raise ValueError("y and V must have matching shapes")
    if np.any(V <= 0.0):
        raise ValueError("split denominator must be strictly positive")
    return DiagonalMetric(1.0 / _clamp_band(y_k / V, k, clamp_numerator))


def check_schedule_growth(D_prev: DiagonalMetric, D_next: DiagonalMetric, eta_k: float) -> bool:
    """Componentwise test D_next <= (1 + eta_k) * D_prev."""
    if D_prev.n != D_next.n:
        raise ValueError("metric dimensions do not match")
    return bool(np.all(D_next.diag <= (1.0 + eta_k) * D_prev.diag))


def growth_factor(D_prev: DiagonalMetric, D_next: DiagonalMetric) -> float:
    """A-posteriori growth eta_k = max(0, max_i D_next_i/D_prev_i - 1)."""
    if D_prev.n != D_next.n:
        raise ValueError("metric dimensions do not match")
    return max(0.0, float(np.max(D_next.diag / D_prev.diag)) - 1.0)


class IdentityMetricProvider:
    """Constant identity metric."""

    def trial(self, k: int, y: Array, grad_y: Array) -> DiagonalMetric:
        return identity_metric(y.shape[0])

    def accept(self, k: int, grad_y: Array) -> None:
        pass


class AdaGradMetricProvider:
    """Accumulated-squared-gradient diagonal with trial/accept semantics.

    ``trial`` prices in the candidate gradient without mutating the state, so
    rejected line-search trials leave no trace; ``accept`` commits the
    gradient of the accepted extrapolated point.
    """

    def __init__(self, epsilon: float = DEFAULT_EPSILON,
                 clamp_numerator: float = DEFAULT_CLAMP_NUMERATOR):
        self.epsilon = float(epsilon)
        self.clamp_numerator = float(clamp_numerator)
        self._acc: Array | None = None

    def trial(self, k: int, y: Array, grad_y: Array) -> DiagonalMetric:
        acc = self._acc if self._acc is not None else 0.0
        d = np.sqrt(acc + grad_y * grad_y + self.epsilon)
        return DiagonalMetric(_clamp_band(d, k, self.clamp_numerator))

    def accept(self, k: int, grad_y: Array) -> None:
        if self._acc is None:
            self._acc = np.zeros_like(grad_y)
        self._acc = self._acc + grad_y * grad_y


class SplitGradientMetricProvider:
    """Diagonal from the positive split of the gradient at the trial point.

    ``v_fn`` maps a feasible point y to the strictly positive split
    denominator V(y).
    """

    def __init__(self, v_fn, clamp_numerator: float = DEFAULT_CLAMP_NUMERATOR):
        self.v_fn = v_fn
        self.clamp_numerator = float(clamp_numerator)

    def trial(self, k: int, y: Array, grad_y: Array) -> DiagonalMetric:
        return split_gradient_metric(k, y, self.v_fn(y), self.clamp_numerator)

    def accept(self, k: int, grad_y: Array) -> None:
        pass
