"""Outer loops: extrapolated proximal DC iterations and their convex variant.

``spdcae_run`` is the general loop: at each iteration it linearizes the
concave part at the previous iterate, extrapolates, and takes one scaled
proximal step whose step size is set by a backtracking line search.
``sfista_run`` is the convex specialization (h = 0) with the coupled theta
schedule, ``pdcae_run`` the fixed-step identity-metric baseline, and
``adca_run`` a fixed-step baseline that gates extrapolation on recent
objective values.  Audit helpers re-check the per-iteration inequalities the
analysis relies on, from recorded iteration snapshots.
"""

from __future__ import annotations

import time
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .accel import BetaSchedule, ThetaState
from .linesearch import (BacktrackConfig, IterateState, LineSearchError,
                         LineSearchOutcome, backtrack_step, sufficient_decrease)
from .metric import (AdaGradMetricProvider, DiagonalMetric,
                     IdentityMetricProvider, SplitGradientMetricProvider,
                     identity_metric, weighted_norm_sq)
from .problem import DcProblem, criticality_residual, objective

Array = np.ndarray


@dataclass
class StoppingRule:
    """Disjunction of stopping conditions checked after each iteration.

    Any satisfied clause stops the run: the iteration cap, an absolute
    objective target, a relative error against a supplied reference value
    (absolute difference when the reference is nonpositive), or a threshold
    on the fixed-point criticality residual.
    """

    max_iter: int = 10000
    f_target: float | None = None
    ref_value: float | None = None
    rel_tol: float | None = None
    crit_tol: float | None = None

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("iteration cap must be nonnegative")
        if self.rel_tol is not None and self.ref_value is None:
            raise ValueError("relative tolerance needs a reference value")


def relative_error(F: float, ref: float) -> float:
    """(F - ref)/ref for positive ref, absolute difference otherwise."""
    if ref > 0.0:
        return (F - ref) / ref
    return F - ref


@dataclass
class TraceRecord:
    """One accepted outer iteration, as written to trace CSVs."""

    k: int
    F_value: float
    rel_error: float | None
    L_accepted: float
    t: float
    n_backtracks: int
    beta_used: float
    restarted: bool
    wall_clock_seconds: float
    descent_slack: float | None = None
    lyapunov_value: float | None = None
    gate_passed: bool | None = None


@dataclass
class IterationSnapshot:
    """Everything an audit needs to re-check iteration k's inequalities."""

    k: int
    x: Array
    y: Array
    t: float
    L: float
    beta: float
    theta: float
    h_prev: Array
    metric_diag: Array


@dataclass
class RunResult:
    """Solver output: final iterate, per-iteration trace, optional snapshots."""

    x: Array
    trace: List[TraceRecord]
    states: Optional[List[IterationSnapshot]]
    stop_reason: str
    x0: Array

    @property
    def n_iterations(self) -> int:
        return len(self.trace)

    @property
    def F_final(self) -> float:
        return self.trace[-1].F_value if self.trace else float("nan")


@dataclass
class SolverConfig:
    """All tunables of the extrapolated proximal DC loop."""

    backtrack: BacktrackConfig = field(default_factory=BacktrackConfig)
    beta_family: str = "fixed-adaptive-restart"
    delta: float = 0.99
    T2: int = 200
    legacy_restart_divisibility: bool = False
    metric: str = "identity"  # identity | adagrad | split-gradient
    epsilon: float = 1e-6
    clamp_numerator: float = 1e13


def _make_beta_schedule(config: SolverConfig) -> BetaSchedule:
    mode = "classical" if config.backtrack.mode == "monotone" else "coupled"
    return BetaSchedule(family=config.beta_family, delta=config.delta,
                        T2=config.T2,
                        legacy_divisibility=config.legacy_restart_divisibility,
                        theta_state=ThetaState(mode=mode))


def _make_metric_provider(config: SolverConfig, problem: DcProblem):
    if config.metric == "identity":
        return IdentityMetricProvider()
    if config.metric == "adagrad":
        return AdaGradMetricProvider(epsilon=config.epsilon,
                                     clamp_numerator=config.clamp_numerator)
    if config.metric == "split-gradient":
        if problem.grad_split is None:
            raise ValueError("split-gradient metric needs problem.grad_split")
        return SplitGradientMetricProvider(lambda y: problem.grad_split(y)[1],
                                           clamp_numerator=config.clamp_numerator)
    raise ValueError(f"unknown metric strategy: {config.metric!r}")


def _check_start(problem: DcProblem, x0) -> Array:
    x0 = np.asarray(x0, dtype=float).copy()
    if problem.g.eval(x0) == float("inf") or not problem.feasible_set.contains(x0):
        raise ValueError("start point is infeasible")
    return x0


def _stop_reason(problem: DcProblem, stop: StoppingRule, F: float,
                 rel: float | None, x: Array, t: float) -> str | None:
    if stop.f_target is not None and F <= stop.f_target:
        return "f_target"
    if stop.rel_tol is not None and rel is not None and rel <= stop.rel_tol:
        return "rel_tol"
    if stop.crit_tol is not None:
        if criticality_residual(problem, x, t) <= stop.crit_tol:
            return "crit_tol"
    return None


def spdcae_run(problem: DcProblem, config: SolverConfig,
               stop: StoppingRule | None = None, *, x0,
               keep_states: bool = False, diagnostics: bool = False) -> RunResult:
    """Extrapolated proximal DC loop with line search and variable metric.

    Per iteration: take a subgradient of h at the previous iterate, then let
    the backtracking line search settle the step size; the extrapolation
    weight and the metric are re-evaluated inside each trial (non-monotone
    mode) since both may depend on the trial step.  The restart rule fires
    after the step, using the accepted iterate.

    ``x0`` must lie in dom g and the feasible set.  ``keep_states`` records
    per-iteration snapshots for the audit helpers; ``diagnostics`` fills the
    per-iteration descent slack into the trace.
    """
    stop = stop or StoppingRule()
    x0 = _check_start(problem, x0)
    beta_schedule = _make_beta_schedule(config)
    metric_provider = _make_metric_provider(config, problem)
    state = IterateState(x_prev=x0, x_prev2=x0, L_prev=config.backtrack.L_init, k=1)

    trace: List[TraceRecord] = []
    states: List[IterationSnapshot] = []
    t_start = time.perf_counter()
    stop_reason = "max_iter"

    for k in range(1, stop.max_iter + 1):
        state.k = k
        state.h_prev = problem.h.subgrad(state.x_prev)
        out = backtrack_step(problem, config.backtrack, state,
                             beta_schedule, metric_provider)
        beta_schedule.commit(out.theta, out.t)
        metric_provider.accept(k, out.grad_y)
        restarted = beta_schedule.finish_iteration(k, out.x_new, state.x_prev, out.y)

        F = objective(problem, out.x_new)
        rel = relative_error(F, stop.ref_value) if stop.ref_value is not None else None
        record = TraceRecord(k=k, F_value=F, rel_error=rel, L_accepted=out.L,
                             t=out.t, n_backtracks=out.n_backtracks,
                             beta_used=out.beta, restarted=restarted,
                             wall_clock_seconds=time.perf_counter() - t_start)
        if diagnostics:
            record.descent_slack = descent_slack(problem, state.x_prev,
                                                 state.h_prev, out.y,
                                                 out.x_new, out.t, out.metric)
        trace.append(record)
        if keep_states:
            states.append(IterationSnapshot(k=k, x=out.x_new, y=out.y, t=out.t,
                                            L=out.L, beta=out.beta, theta=out.theta,
                                            h_prev=state.h_prev,
                                            metric_diag=out.metric.diag))

        state.x_prev2 = state.x_prev
        state.x_prev = out.x_new
        state.L_prev = out.L

        reason = _stop_reason(problem, stop, F, rel, out.x_new, out.t)
        if reason is not None:
            stop_reason = reason
            break

    return RunResult(x=state.x_prev, trace=trace,
                     states=states if keep_states else None,
                     stop_reason=stop_reason, x0=x0)


def sfista_run(problem: DcProblem, config: SolverConfig,
               stop: StoppingRule | None = None, *, x0,
               keep_states: bool = False, diagnostics: bool = False) -> RunResult:
    """Convex specialization: h must be identically zero.

    Runs the same loop with the plain coupled-theta weight (no restart), which
    is what the O(1/k^2) certificate is stated for.
    """
    if not problem.h.is_zero:
        raise ValueError("the convex loop requires h = 0; use spdcae_run instead")
    cfg = SolverConfig(backtrack=config.backtrack, beta_family="plain",
                       metric=config.metric, epsilon=config.epsilon,
                       clamp_numerator=config.clamp_numerator)
    return spdcae_run(problem, cfg, stop, x0=x0,
                      keep_states=keep_states, diagnostics=diagnostics)


def _warn_fixed_step(violations: int, where: str) -> None:
    if violations == 1:
        warnings.warn(f"{where}: fixed step violates the descent bound; "
                      "the supplied curvature constant is likely too small",
                      RuntimeWarning, stacklevel=3)


def pdcae_run(problem: DcProblem, L_fixed: float,
              restart_config: BetaSchedule | None = None,
              stop: StoppingRule | None = None, *, x0,
              keep_states: bool = False) -> RunResult:
    """Fixed-step identity-metric baseline with classical restarted weights.

    Equivalent to the general loop with a constant step 1/L_fixed and no line
    search.  Violations of the descent bound at the fixed step are reported
    once as a RuntimeWarning (the constant was under-estimated), not errors.
    """
    if L_fixed <= 0.0:
        raise ValueError("fixed curvature constant must be positive")
    stop = stop or StoppingRule()
    x0 = _check_start(problem, x0)
    if restart_config is None:
        restart_config = BetaSchedule(family="fixed-adaptive-restart", T2=200,
                                      theta_state=ThetaState(mode="classical"))
    t = 1.0 / L_fixed

    x_prev = x0
    x_prev2 = x0
    trace: List[TraceRecord] = []
    states: List[IterationSnapshot] = []
    t_start = time.perf_counter()
    stop_reason = "max_iter"
    violations = 0

    for k in range(1, stop.max_iter + 1):
        h_prev = problem.h.subgrad(x_prev)
        beta, theta = restart_config.propose(t)
        y = problem.feasible_set.scaled_project(x_prev + beta * (x_prev - x_prev2))
        grad_y = problem.f.grad(y)
        x_new = problem.g.scaled_prox(y - t * (grad_y - h_prev), t, None)
        restart_config.commit(theta, t)
        restarted = restart_config.finish_iteration(k, x_new, x_prev, y)
        if not sufficient_decrease(problem.f, x_new, y, grad_y, t, None):
            violations += 1
            _warn_fixed_step(violations, "pdcae_run")

        F = objective(problem, x_new)
        rel = relative_error(F, stop.ref_value) if stop.ref_value is not None else None
        trace.append(TraceRecord(k=k, F_value=F, rel_error=rel, L_accepted=L_fixed,
                                 t=t, n_backtracks=0, beta_used=beta,
                                 restarted=restarted,
                                 wall_clock_seconds=time.perf_counter() - t_start))
        if keep_states:
            states.append(IterationSnapshot(k=k, x=x_new, y=y, t=t, L=L_fixed,
                                            beta=beta, theta=theta, h_prev=h_prev,
                                            metric_diag=np.ones_like(x_new)))

        x_prev2 = x_prev
        x_prev = x_new

        reason = _stop_reason(problem, stop, F, rel, x_new, t)
        if reason is not None:
            stop_reason = reason
            break

    return RunResult(x=x_prev, trace=trace,
                     states=states if keep_states else None,
                     stop_reason=stop_reason, x0=x0)


@dataclass
class AdcaHistory:
    """Ring buffer of the objective values of the last q+1 actual iterates."""

    q: int
    values: deque = field(init=False)

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("history depth q must be nonnegative")
        self.values = deque(maxlen=self.q + 1)

    def push(self, F: float) -> None:
        self.values.append(F)

    def max(self) -> float:
        return max(self.values)


def adca_run(problem: DcProblem, L_fixed: float, q: int,
             stop: StoppingRule | None = None, *, x0,
             keep_states: bool = False) -> RunResult:
    """Fixed-step baseline that gates extrapolation on recent objectives.

    The candidate z = x + beta (x - x_prev) (projected onto the feasible set
    when it is not the whole space) is used as the base of the proximal step
    only if F(z) does not exceed the largest of the last q+1 iterate values;
    otherwise the step is taken from the current iterate.  Only actual
    iterates enter the history.  The trace records the gate decision, with
    beta_used = 0 on rejected candidates.
    """
    if L_fixed <= 0.0:
        raise ValueError("fixed curvature constant must be positive")
    stop = stop or StoppingRule()
    x0 = _check_start(problem, x0)
    t = 1.0 / L_fixed
    schedule = BetaSchedule(family="plain", theta_state=ThetaState(mode="classical"))
    history = AdcaHistory(q)
    history.push(objective(problem, x0))

    x_prev = x0
    x_prev2 = x0
    trace: List[TraceRecord] = []
    states: List[IterationSnapshot] = []
    t_start = time.perf_counter()
    stop_reason = "max_iter"
    violations = 0

    for k in range(1, stop.max_iter + 1):
        beta, theta = schedule.propose(t)
        z = x_prev + beta * (x_prev - x_prev2)
        if problem.feasible_set.kind != "whole-space":
            z = problem.feasible_set.scaled_project(z)
        gate = objective(problem, z) <= history.max()
        base = z if gate else x_prev
        h_base = problem.h.subgrad(base)
        grad_base = problem.f.grad(base)
        x_new = problem.g.scaled_prox(base - t * (grad_base - h_base), t, None)
        schedule.commit(theta, t)
        if not sufficient_decrease(problem.f, x_new, base, grad_base, t, None):
            violations += 1
            _warn_fixed_step(violations, "adca_run")

        F = objective(problem, x_new)
        history.push(F)
        rel = relative_error(F, stop.ref_value) if stop.ref_value is not None else None
        trace.append(TraceRecord(k=k, F_value=F, rel_error=rel, L_accepted=L_fixed,
                                 t=t, n_backtracks=0,
                                 beta_used=beta if gate else 0.0,
                                 restarted=False,
                                 wall_clock_seconds=time.perf_counter() - t_start,
                                 gate_passed=gate))
        if keep_states:
            states.append(IterationSnapshot(k=k, x=x_new, y=base, t=t, L=L_fixed,
                                            beta=beta if gate else 0.0, theta=theta,
                                            h_prev=h_base,
                                            metric_diag=np.ones_like(x_new)))

        x_prev2 = x_prev
        x_prev = x_new

        reason = _stop_reason(problem, stop, F, rel, x_new, t)
        if reason is not None:
            stop_reason = reason
            break

    return RunResult(x=x_prev, trace=trace,
                     states=states if keep_states else None,
                     stop_reason=stop_reason, x0=x0)


# --- audits ----------------------------------------------------------------

def descent_slack(problem: DcProblem, x: Array, h_x: Array, y: Array,
                  y_bar: Array, t: float, D: DiagonalMetric | None) -> float:
    """Slack of the one-step comparison bound, nonnegative when exact.

    For y_bar produced by the scaled proximal step at y with the subgradient
    h_x taken at x, the bound reads
    F(y_bar) <= F(x) + ||x - y||_D^2/(2t) - ||x - y_bar||_D^2/(2t);
    returned is rhs - lhs.  ``h_x`` documents the linearization the step used
    and is not re-derived here.
    """
    if t <= 0.0:
        raise ValueError("step size must be positive")
    rhs = objective(problem, x) + (weighted_norm_sq(x - y, D)
                                   - weighted_norm_sq(x - y_bar, D)) / (2.0 * t)
    return rhs - objective(problem, y_bar)


def _iter_pairs(result: RunResult):
    """Yield (x_prev, snapshot) pairs over recorded iterations."""
    if result.states is None:
        raise ValueError("run was made without keep_states=True")
    x_prev = result.x0
    for snap in result.states:
        yield x_prev, snap
        x_prev = snap.x


def descent_inequality_slacks(problem: DcProblem, result: RunResult) -> np.ndarray:
    """Per-iteration slack of the objective descent bound.

    F(x_k) <= F(x_{k-1}) + ||x_{k-1} - y_k||_D^2/(2 t_k)
                        - ||x_k - x_{k-1}||_D^2/(2 t_k).
    """
    slacks = []
    for x_prev, snap in _iter_pairs(result):
        D = DiagonalMetric(snap.metric_diag)
        slacks.append(descent_slack(problem, x_prev, snap.h_prev, snap.y,
                                    snap.x, snap.t, D))
    return np.asarray(slacks)


def extrapolation_slacks(result: RunResult) -> np.ndarray:
    """Per-iteration slack of ||x_{k-1} - y_k||_D^2 <= beta_k^2 ||x_{k-1} - x_{k-2}||_D^2."""
    if result.states is None:
        raise ValueError("run was made without keep_states=True")
    slacks = []
    x_prev, x_prev2 = result.x0, result.x0
    for snap in result.states:
        D = DiagonalMetric(snap.metric_diag)
        lhs = D.norm_sq(x_prev - snap.y)
        rhs = snap.beta ** 2 * D.norm_sq(x_prev - x_prev2)
        slacks.append(rhs - lhs)
        x_prev2 = x_prev
        x_prev = snap.x
    return np.asarray(slacks)


def sfista_lyapunov(problem: DcProblem, x_star: Array, phi_star: float,
                    result: RunResult) -> np.ndarray:
    """Per-iteration slacks of the accelerated-rate energy inequality.

    With v_k = x_{k-1} + theta_k (x_k - x_{k-1}) (v_0 = x_0, t_0 = 0), checks

      t_k theta_k^2 (F(x_k) - phi_star) + ||x* - v_k||_{D_k}^2 / 2
        <= t_{k-1} theta_{k-1}^2 (F(x_{k-1}) - phi_star)
           + ||x* - v_{k-1}||_{D_k}^2 / 2,

    both norms in the iteration-k metric.  Returns rhs - lhs per iteration;
    nonnegative when the coupled theta schedule ran unrestarted.
    """
    if result.states is None:
        raise ValueError("run was made without keep_states=True")
    x_star = np.asarray(x_star, dtype=float)
    slacks = []
    v_prev = result.x0
    t_prev = 0.0
    theta_prev = 1.0
    F_prev = objective(problem, result.x0)
    for x_prev, snap in _iter_pairs(result):
        D = DiagonalMetric(snap.metric_diag)
        v_k = x_prev + snap.theta * (snap.x - x_prev)
        F_k = objective(problem, snap.x)
        lhs = snap.t * snap.theta ** 2 * (F_k - phi_star) + 0.5 * D.norm_sq(x_star - v_k)
        rhs = t_prev * theta_prev ** 2 * (F_prev - phi_star) + 0.5 * D.norm_sq(x_star - v_prev)
        slacks.append(rhs - lhs)
        v_prev = v_k
        t_prev = snap.t
        theta_prev = snap.theta
        F_prev = F_k
    return np.asarray(slacks)
