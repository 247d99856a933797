"""Backtracking line search around the scaled proximal step.

A trial with curvature estimate L (step t = 1/L) is accepted when the smooth
term satisfies the quadratic upper bound at the new point, measured in the
trial metric.  Two warm-start policies are supported: monotone (the estimate
is carried over and only ever inflated) and non-monotone (the carried estimate
is periodically deflated so step sizes can grow again).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .metric import DiagonalMetric, weighted_norm_sq
from .problem import DcProblem, SmoothOracle

Array = np.ndarray

# Relative slack absorbing round-off when the bound holds with equality.
_DECREASE_SLACK = 1e-12


class LineSearchError(RuntimeError):
    """The inner loop hit its trial cap without satisfying the decrease test.

    Carries the last trial so the failure can be diagnosed.
    """

    def __init__(self, message: str, k: int, L: float, x: Array, y: Array):
        super().__init__(message)
        self.k = k
        self.L = L
        self.x = x
        self.y = y


@dataclass
class BacktrackConfig:
    """Tunables of the inner loop and its warm-start policy.

    mode
        "monotone" keeps the previous accepted estimate as the next initial
        guess; "nonmonotone" deflates it by rho on scheduled iterations and
        enforces the floor L_floor.
    deflate_when_divisible
        The non-monotone deflation schedule: False (default) deflates when T1
        does not divide k and holds otherwise; True inverts that.
    """

    mode: str = "nonmonotone"
    eta: float = 2.0
    T1: int = 5
    rho: float = 0.5
    L_floor: float = 1e-10
    L_init: float = 1.0
    max_inner: int = 100
    deflate_when_divisible: bool = False

    def __post_init__(self):
        if self.mode not in ("monotone", "nonmonotone"):
            raise ValueError(f"unknown backtracking mode: {self.mode!r}")
        if self.eta <= 1.0:
            raise ValueError("inflation factor eta must exceed 1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("deflation factor rho must lie in (0, 1)")
        if self.L_floor <= 0.0 or self.L_init <= 0.0:
            raise ValueError("curvature estimates must be positive")
        if self.T1 < 1 or self.max_inner < 1:
            raise ValueError("T1 and max_inner must be >= 1")


@dataclass
class IterateState:
    """Rolling solver state entering outer iteration k.

    Holds the two most recent iterates (equal at the start), the subgradient
    of the concave part at the newest one, and the last accepted curvature
    estimate.
    """

    x_prev: Array
    x_prev2: Array
    h_prev: Array | None = None
    L_prev: float = 1.0
    k: int = 1


@dataclass
class LineSearchOutcome:
    """Accepted trial of one outer iteration."""

    L: float
    t: float
    x_new: Array
    y: Array
    n_backtracks: int
    beta: float
    theta: float
    grad_y: Array
    metric: DiagonalMetric


def initial_L(config: BacktrackConfig, k: int, L_returned_prev: float) -> float:
    """Warm-start curvature guess for outer iteration k.

    Monotone mode passes the previous accepted estimate through.  Non-monotone
    mode deflates it by rho on scheduled iterations (see
    ``deflate_when_divisible``) and never returns less than L_floor.  At k = 1
    the caller supplies L_init as the previous estimate.
    """
    if k < 1:
        raise ValueError("iteration counter must be >= 1")
    if L_returned_prev <= 0.0:
        raise ValueError("previous curvature estimate must be positive")
    if config.mode == "monotone":
        return L_returned_prev
    if k == 1:
        return max(config.L_floor, L_returned_prev)
    divisible = (k % config.T1 == 0)
    deflate = divisible if config.deflate_when_divisible else not divisible
    guess = config.rho * L_returned_prev if deflate else L_returned_prev
    return max(config.L_floor, guess)


def sufficient_decrease(f: SmoothOracle, x: Array, y: Array, grad_y: Array,
                        t: float, D: Optional[DiagonalMetric]) -> bool:
    """Quadratic upper bound test in the metric D.

    f(x) <= f(y) + <grad_y, x - y> + ||x - y||_D^2 / (2 t), with a relative
    slack of 1e-12 * max(1, |f(y)|) so exact-curvature steps are accepted.
    """
    if t <= 0.0:
        raise ValueError("step size must be positive")
    fy = float(f.eval(y))
    fx = float(f.eval(x))
    d = x - y
    bound = fy + float(np.dot(grad_y, d)) + weighted_norm_sq(d, D) / (2.0 * t)
    return fx <= bound + _DECREASE_SLACK * max(1.0, abs(fy))


def backtrack_step(problem: DcProblem, config: BacktrackConfig,
                   state: IterateState, beta_provider, metric_provider) -> LineSearchOutcome:
    """Run one outer iteration's inner loop and return the accepted trial.

    ``beta_provider.propose(t)`` and ``metric_provider.trial(k, y, grad_y)``
    are re-evaluated inside every trial in non-monotone mode, since the
    coupled weight depends on the trial step size; monotone mode fixes the
    extrapolated point (classical weights do not depend on t) and only
    re-solves the prox subproblem.  Providers are not committed here: the
    caller records the accepted theta and gradient.
    """
    k = state.k
    x_prev, x_prev2 = state.x_prev, state.x_prev2
    h_prev = state.h_prev
    if h_prev is None:
        h_prev = problem.h.subgrad(x_prev)
    L = initial_L(config, k, state.L_prev if k > 1 else config.L_init)
    monotone = config.mode == "monotone"

    beta = theta = 0.0
    y = grad_y = None
    D: DiagonalMetric | None = None
    if monotone:
        t = 1.0 / L
        beta, theta = beta_provider.propose(t)
        y = problem.feasible_set.scaled_project(x_prev + beta * (x_prev - x_prev2))
        grad_y = problem.f.grad(y)
        D = metric_provider.trial(k, y, grad_y)

    for i in range(config.max_inner):
        t = 1.0 / L
        if not monotone:
            beta, theta = beta_provider.propose(t)
            y = problem.feasible_set.scaled_project(x_prev + beta * (x_prev - x_prev2))
            grad_y = problem.f.grad(y)
            D = metric_provider.trial(k, y, grad_y)
        step = y - t * (grad_y - h_prev) / D.diag
        x_new = problem.g.scaled_prox(step, t, D)
        if sufficient_decrease(problem.f, x_new, y, grad_y, t, D):
            return LineSearchOutcome(L=L, t=t, x_new=x_new, y=y, n_backtracks=i,
                                     beta=beta, theta=theta, grad_y=grad_y, metric=D)
        L = config.eta * L

    raise LineSearchError(
        f"line search did not terminate within {config.max_inner} trials "
        f"at iteration {k} (last L = {L:.3e})", k=k, L=L, x=x_prev, y=y)
