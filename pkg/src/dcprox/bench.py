"""Benchmark harness: problem building, reference values, and run matrices.

A run configuration names one problem, a list of solver profiles, a
decreasing tolerance grid, and a list of seeds.  Each (solver, seed) cell is
one solver run; first-hit iteration counts and times for every tolerance are
read off the run's trace in a single pass, and rows are aggregated over the
seeds that reached each tolerance.  Reference objective values come from a
long run of a designated reference solver.  Runs are sequential and
deterministic for a fixed configuration.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .datasets import (gen_logreg, gen_poisson_cs, load_dataset_json,
                       make_rng, read_libsvm, resample_counts)
from .linesearch import BacktrackConfig
from .logreg import LogRegData, build_logreg_problem, logistic_lipschitz_bound
from .poisson import PoissonCsData, build_poisson_problem
from .problem import DcProblem, objective
from .solver import (RunResult, SolverConfig, StoppingRule, TraceRecord,
                     adca_run, pdcae_run, spdcae_run)

Array = np.ndarray


class ConfigError(ValueError):
    """Invalid run configuration; the command line maps this to exit code 2."""


_SOLVER_NAMES = ("spdcae1", "spdcae0", "pdcae1", "pdcae0", "pdcae", "adca")

_CONFIG_KEYS = {"problem", "solvers", "tolerances", "seeds", "max_iter",
                "reference_solver", "reference_iterations", "reference_seed",
                "out_dir"}


@dataclass
class RunConfig:
    """Validated benchmark configuration."""

    problem: dict
    solvers: List[dict]
    tolerances: List[float]
    seeds: List[int]
    max_iter: int = 10000
    reference_solver: str = "pdcae1"
    reference_iterations: int = 10000
    reference_seed: int = 0
    out_dir: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.problem, dict) or "kind" not in self.problem:
            raise ConfigError("problem must be a mapping with a 'kind'")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        for s in self.solvers:
            if not isinstance(s, dict) or "name" not in s:
                raise ConfigError("each solver entry needs a 'name'")
            if s["name"] not in _SOLVER_NAMES:
                raise ConfigError(f"unknown solver: {s['name']!r}")
        if not self.tolerances or any(t <= 0.0 for t in self.tolerances):
            raise ConfigError("tolerances must be positive")
        if any(a <= b for a, b in zip(self.tolerances, self.tolerances[1:])):
            raise ConfigError("tolerances must be strictly decreasing")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.max_iter < 1 or self.reference_iterations < 0:
            raise ConfigError("iteration budgets must be positive")
        if self.reference_solver not in _SOLVER_NAMES:
            raise ConfigError(f"unknown reference solver: {self.reference_solver!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        missing = {"problem", "solvers", "tolerances", "seeds"} - set(d)
        if missing:
            raise ConfigError(f"missing configuration keys: {sorted(missing)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class SummaryRow:
    """Aggregate of one (solver, tolerance) pair over the seed list.

    Means cover only the seeds whose run reached the tolerance; ``max_flag``
    marks rows where some seed exhausted the iteration cap first.
    """

    solver: str
    tol: float
    mean_iterations: Optional[float]
    mean_seconds: Optional[float]
    hit_rate: float
    max_flag: bool


# --- problem construction ----------------------------------------------------

@dataclass
class _Base:
    """Problem family shared across seeds."""

    kind: str  # logreg | poisson
    data: object
    truth: Optional[Array]
    problem: Optional[DcProblem]  # shared instance when seeds share the data
    L_hint: Optional[float] = None


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"problem config is missing {key!r}")
    return cfg[key]


def _build_base(pcfg: dict) -> _Base:
    kind = pcfg["kind"]
    if kind == "logreg-synthetic":
        data, w = gen_logreg(int(_require(pcfg, "m")), int(_require(pcfg, "n")),
                             sparsity_of_truth=float(pcfg.get("sparsity_of_truth", 0.1)),
                             noise_rate=float(pcfg.get("noise_rate", 0.05)),
                             rng=int(pcfg.get("data_seed", 0)),
                             lam=float(pcfg.get("lambda", 1e-3)),
                             scale_decades=float(pcfg.get("scale_decades", 2.0)))
        return _Base("logreg", data, w, build_logreg_problem(data))
    if kind == "poisson-synthetic":
        data, x_true = gen_poisson_cs(n=int(_require(pcfg, "n")),
                                      m=int(_require(pcfg, "m")),
                                      k_nonzeros=int(pcfg.get("k_nonzeros", 20)),
                                      amp_max=float(pcfg.get("amp_max", 1e5)),
                                      p=float(pcfg.get("p", 0.9)),
                                      bg=float(pcfg.get("bg", 1e-10)),
                                      rng=int(pcfg.get("data_seed", 0)),
                                      lam=float(pcfg.get("lambda", 1e-3)))
        return _Base("poisson", data, x_true, None)
    if kind == "logreg-file":
        A, labels = read_libsvm(_require(pcfg, "path"),
                                n_features=pcfg.get("n_features"))
        data = LogRegData(A=A, b=labels, lam=float(pcfg.get("lambda", 1e-3)))
        return _Base("logreg", data, None, build_logreg_problem(data))
    if kind == "dataset-json":
        stored_kind, data, truth, _ = load_dataset_json(_require(pcfg, "path"))
        if stored_kind == "logreg":
            return _Base("logreg", data, truth, build_logreg_problem(data))
        return _Base("poisson", data, truth, None)
    raise ConfigError(f"unknown problem kind: {kind!r}")


def _instance(base: _Base, seed: int) -> Tuple[DcProblem, Array]:
    """Problem and start point for one seed.

    Logistic seeds share the dataset and vary the uniform start point;
    Poisson seeds redraw the count realization (each seed is its own
    instance) and always start from the all-ones vector.
    """
    if base.kind == "logreg":
        x0 = make_rng(seed).random(base.data.n)
        return base.problem, x0
    data_s = resample_counts(base.data, base.truth, make_rng(seed))
    return build_poisson_problem(data_s), np.ones(base.data.n)


# --- solver profiles ----------------------------------------------------------

def _fixed_L(base: _Base, overrides: dict) -> float:
    if "L" in overrides:
        return float(overrides["L"])
    if base.kind == "logreg":
        if base.L_hint is None:
            base.L_hint = logistic_lipschitz_bound(base.data)
        return base.L_hint
    raise ConfigError("fixed-step solvers need an explicit 'L' for this problem")


def _profile(name: str, base_kind: str, overrides: dict) -> SolverConfig:
    scaled = name in ("spdcae1", "spdcae0")
    monotone = name in ("spdcae0", "pdcae0")
    if base_kind == "logreg":
        metric = "adagrad" if scaled else "identity"
        L_init = 1.0 if scaled else 0.1
        eta = 2.0
        max_inner = 100
    else:
        metric = "split-gradient" if scaled else "identity"
        L_init = 0.1 if scaled else 1e-5
        eta = 2.0 if not monotone else 1.2
        # monotone profiles may need ~1e8 inflation on the first iteration
        max_inner = 200
    bt = BacktrackConfig(
        mode="monotone" if monotone else "nonmonotone",
        eta=float(overrides.get("eta", eta)),
        T1=int(overrides.get("T1", 5)),
        rho=float(overrides.get("rho", 0.5)),
        L_floor=float(overrides.get("L_floor", 1e-10)),
        L_init=float(overrides.get("L_init", L_init)),
        max_inner=int(overrides.get("max_inner", max_inner)),
        deflate_when_divisible=bool(overrides.get("deflate_when_divisible", False)))
    return SolverConfig(
        backtrack=bt,
        beta_family=str(overrides.get("beta_family", "fixed-adaptive-restart")),
        delta=float(overrides.get("delta", 0.99)),
        T2=int(overrides.get("T2", 200)),
        legacy_restart_divisibility=bool(overrides.get("legacy_restart_divisibility", False)),
        metric=str(overrides.get("metric", metric)),
        epsilon=float(overrides.get("epsilon", 1e-6)),
        clamp_numerator=float(overrides.get("clamp_numerator", 1e13)))


def _run_cell(name: str, overrides: dict, base: _Base, problem: DcProblem,
              x0: Array, stop: StoppingRule) -> RunResult:
    if name in ("spdcae1", "spdcae0", "pdcae1", "pdcae0"):
        return spdcae_run(problem, _profile(name, base.kind, overrides),
                          stop, x0=x0)
    if name == "pdcae":
        from .accel import BetaSchedule, ThetaState
        schedule = BetaSchedule(
            family=str(overrides.get("beta_family", "fixed-adaptive-restart")),
            T2=int(overrides.get("T2", 200)),
            theta_state=ThetaState(mode="classical"))
        return pdcae_run(problem, _fixed_L(base, overrides), schedule,
                         stop, x0=x0)
    if name == "adca":
        return adca_run(problem, _fixed_L(base, overrides),
                        int(overrides.get("q", 3)), stop, x0=x0)
    raise ConfigError(f"unknown solver: {name!r}")


# --- reference values and the matrix -----------------------------------------

def _reference_value(config: RunConfig, base: _Base, problem: DcProblem,
                     x0: Array) -> float:
    stop = StoppingRule(max_iter=config.reference_iterations)
    result = _run_cell(config.reference_solver, {}, base, problem, x0, stop)
    if result.trace:
        return result.trace[-1].F_value
    return objective(problem, x0)


def run_reference(config: RunConfig) -> float:
    """Final objective of the reference solver on the canonical instance.

    Logistic references share the dataset and use the start drawn from the
    reference seed; Poisson references use the reference seed's count
    realization.  Deterministic for a fixed configuration.
    """
    base = _build_base(config.problem)
    if base.kind == "logreg":
        problem = base.problem
        x0 = make_rng(config.reference_seed).random(base.data.n)
    else:
        problem, x0 = _instance(base, config.reference_seed)
    return _reference_value(config, base, problem, x0)


def _first_hits(trace: List[TraceRecord], tolerances: List[float]):
    """First (iteration, seconds) meeting each tolerance, in one pass."""
    hits: Dict[float, Optional[Tuple[int, float]]] = {t: None for t in tolerances}
    open_tols = sorted(tolerances, reverse=True)  # loosest first
    i = 0
    for rec in trace:
        if rec.rel_error is None:
            continue
        while i < len(open_tols) and rec.rel_error <= open_tols[i]:
            hits[open_tols[i]] = (rec.k, rec.wall_clock_seconds)
            i += 1
        if i == len(open_tols):
            break
    return hits


@dataclass
class BenchResult:
    """Everything a matrix run produced."""

    summary: List[SummaryRow]
    runs: Dict[Tuple[str, int], RunResult]
    references: Dict[int, float]
    hits: Dict[Tuple[str, int], dict] = field(default_factory=dict)


def run_matrix(config: RunConfig) -> BenchResult:
    """Run every (solver, seed) cell and aggregate first-hit statistics.

    When ``config.out_dir`` is set, writes one trace CSV per cell plus
    ``summary.csv`` and ``summary.json``.
    """
    base = _build_base(config.problem)
    shared_ref: Optional[float] = None
    if base.kind == "logreg":
        x0_ref = make_rng(config.reference_seed).random(base.data.n)
        shared_ref = _reference_value(config, base, base.problem, x0_ref)

    runs: Dict[Tuple[str, int], RunResult] = {}
    references: Dict[int, float] = {}
    hits: Dict[Tuple[str, int], dict] = {}
    tightest = min(config.tolerances)

    for seed in config.seeds:
        problem, x0 = _instance(base, seed)
        if shared_ref is not None:
            f_star = shared_ref
        else:
            # each count realization is its own instance; reference per seed
            f_star = _reference_value(config, base, problem, np.ones(base.data.n))
        references[seed] = f_star
        stop = StoppingRule(max_iter=config.max_iter, ref_value=f_star,
                            rel_tol=tightest)
        for scfg in config.solvers:
            name = scfg["name"]
            overrides = {k: v for k, v in scfg.items() if k != "name"}
            result = _run_cell(name, overrides, base, problem, x0, stop)
            runs[(name, seed)] = result
            hits[(name, seed)] = _first_hits(result.trace, config.tolerances)

    summary: List[SummaryRow] = []
    for scfg in config.solvers:
        name = scfg["name"]
        for tol in config.tolerances:
            cell_hits = [hits[(name, seed)][tol] for seed in config.seeds]
            reached = [h for h in cell_hits if h is not None]
            rate = len(reached) / len(config.seeds)
            summary.append(SummaryRow(
                solver=name, tol=tol,
                mean_iterations=(float(np.mean([h[0] for h in reached]))
                                 if reached else None),
                mean_seconds=(float(np.mean([h[1] for h in reached]))
                              if reached else None),
                hit_rate=rate,
                max_flag=rate < 1.0))

    result = BenchResult(summary=summary, runs=runs, references=references,
                         hits=hits)
    if config.out_dir:
        write_outputs(config, result)
    return result


# --- persistence ---------------------------------------------------------------

TRACE_HEADER = ["k", "F", "rel_err", "L", "t", "backtracks", "beta",
                "restarted", "seconds"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_trace_csv(path, trace: List[TraceRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for rec in trace:
            writer.writerow([_fmt(rec.k), _fmt(rec.F_value), _fmt(rec.rel_error),
                             _fmt(rec.L_accepted), _fmt(rec.t),
                             _fmt(rec.n_backtracks), _fmt(rec.beta_used),
                             _fmt(rec.restarted), _fmt(rec.wall_clock_seconds)])


def read_trace_csv(path) -> List[TraceRecord]:
    out: List[TraceRecord] = []
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ConfigError(f"unexpected trace header: {header}")
        for row in reader:
            out.append(TraceRecord(
                k=int(row[0]), F_value=float(row[1]),
                rel_error=float(row[2]) if row[2] else None,
                L_accepted=float(row[3]), t=float(row[4]),
                n_backtracks=int(row[5]), beta_used=float(row[6]),
                restarted=row[7] == "1",
                wall_clock_seconds=float(row[8])))
    return out


def write_outputs(config: RunConfig, result: BenchResult) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    for (name, seed), run in result.runs.items():
        write_trace_csv(os.path.join(config.out_dir, f"trace_{name}_{seed}.csv"),
                        run.trace)
    rows = result.summary
    with open(os.path.join(config.out_dir, "summary.csv"), "w", newline="",
              encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver", "tol", "mean_iterations", "mean_seconds",
                         "hit_rate", "max_flag"])
        for r in rows:
            writer.writerow([r.solver, _fmt(r.tol), _fmt(r.mean_iterations),
                             _fmt(r.mean_seconds), _fmt(r.hit_rate),
                             _fmt(r.max_flag)])
    payload = {"reference_values": {str(k): v for k, v in result.references.items()},
               "summary": [asdict(r) for r in rows]}
    with open(os.path.join(config.out_dir, "summary.json"), "w",
              encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)


def read_summary_csv(path) -> List[SummaryRow]:
    out: List[SummaryRow] = []
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.append(SummaryRow(
                solver=row[0], tol=float(row[1]),
                mean_iterations=float(row[2]) if row[2] else None,
                mean_seconds=float(row[3]) if row[3] else None,
                hit_rate=float(row[4]), max_flag=row[5] == "1"))
    return out
