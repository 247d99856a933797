"""Proximal solvers for difference-of-convex composite objectives.

Minimizes F(x) = f(x) + g(x) - h(x) with f smooth convex, g proximable
convex, and h convex continuous, via extrapolated proximal steps under a
variable diagonal metric with a non-monotone backtracking line search.
Includes fixed-step and objective-gated baselines, certificate audits, and a
benchmark harness for synthetic logistic and Poisson inverse problems.
"""

from .accel import BetaSchedule, ThetaState, beta_contract, beta_restart, theta_next
from .bench import (BenchResult, ConfigError, RunConfig, SummaryRow,
                    read_summary_csv, read_trace_csv, run_matrix,
                    run_reference, write_trace_csv)
from .datasets import (ParseError, RngSpec, gen_logreg, gen_poisson_cs,
                       load_dataset_json, make_rng, poisson_sample,
                       read_libsvm, resample_counts, save_dataset_json,
                       write_libsvm)
from .linesearch import (BacktrackConfig, IterateState, LineSearchError,
                         LineSearchOutcome, backtrack_step, initial_L,
                         sufficient_decrease)
from .logreg import (LogRegData, build_logreg_problem, l1_proximable,
                     l1_scaled_prox, l2_concave, l2_subgradient,
                     logistic_lipschitz_bound, logistic_value_grad)
from .metric import (AdaGradMetricProvider, DiagonalMetric,
                     IdentityMetricProvider, MetricSchedule,
                     SplitGradientMetricProvider, adagrad_metric,
                     check_schedule_growth, gamma, growth_factor,
                     identity_metric, split_gradient_metric,
                     weighted_norm_sq)
from .poisson import (PoissonCsData, build_poisson_problem, kl_split,
                      kl_value_grad, l1_nonneg_proximable,
                      l1_nonneg_scaled_prox)
from .problem import (ConcavePartOracle, DcProblem, EvaluationDomainError,
                      FeasibleSet, ProximableOracle, SmoothOracle, box,
                      criticality_residual, least_squares_smooth,
                      nonnegative_orthant, objective, quadratic_smooth,
                      whole_space, zero_concave, zero_proximable)
from .solver import (RunResult, SolverConfig, StoppingRule, TraceRecord,
                     adca_run, descent_inequality_slacks, descent_slack,
                     extrapolation_slacks, pdcae_run, relative_error,
                     sfista_lyapunov, sfista_run, spdcae_run)

__version__ = "0.1.0"

__all__ = [
    "AdaGradMetricProvider", "BacktrackConfig", "BenchResult", "BetaSchedule",
    "ConcavePartOracle", "ConfigError", "DcProblem", "DiagonalMetric",
    "EvaluationDomainError", "FeasibleSet", "IdentityMetricProvider",
    "IterateState", "LineSearchError", "LineSearchOutcome", "LogRegData",
    "MetricSchedule", "ParseError", "PoissonCsData", "ProximableOracle",
    "RngSpec", "RunConfig", "RunResult", "SmoothOracle", "SolverConfig",
    "SplitGradientMetricProvider", "StoppingRule", "SummaryRow",
    "TraceRecord", "adagrad_metric", "adca_run", "backtrack_step",
    "beta_contract", "beta_restart", "box", "build_logreg_problem",
    "build_poisson_problem", "check_schedule_growth", "criticality_residual",
    "descent_inequality_slacks", "descent_slack", "extrapolation_slacks",
    "gamma",
    "gen_logreg", "gen_poisson_cs", "growth_factor", "identity_metric",
    "initial_L", "kl_split", "kl_value_grad", "l1_nonneg_proximable",
    "l1_nonneg_scaled_prox", "l1_proximable", "l1_scaled_prox", "l2_concave",
    "l2_subgradient", "least_squares_smooth", "load_dataset_json",
    "logistic_lipschitz_bound", "logistic_value_grad", "make_rng",
    "nonnegative_orthant", "objective", "pdcae_run", "poisson_sample",
    "quadratic_smooth", "read_libsvm", "read_summary_csv",
    "read_trace_csv", "relative_error", "resample_counts", "run_matrix",
    "run_reference", "save_dataset_json", "sfista_lyapunov", "sfista_run",
    "spdcae_run", "split_gradient_metric", "sufficient_decrease", "theta_next",
    "weighted_norm_sq", "whole_space", "write_libsvm", "write_trace_csv",
    "zero_concave", "zero_proximable",
]
