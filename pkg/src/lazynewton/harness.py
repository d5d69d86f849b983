"""Experiment harness: problem/method registry, reference values, CSV traces.

Configs are plain ``key = value`` text with ``[section]`` headers.  One
config describes a grid: every combination of problem section, method
section, per-method hyperparameter list, and seed becomes one run with
its own counters and trace.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import baselines, problems
from .alen import MsConfig, alen_run, anpe_run, lazy_crn_run
from .baselines import FirstOrderConfig, agd_run, eg_run
from .errors import ConfigError
from .len_solver import LenConfig, len_run, npe_run
from .problems import ProblemInstance, ProblemKind
from .restart import RestartConfig, alen_restart, len_restart
from .trace import RunTrace

CSV_HEADER = "iter,wall_time_s,grad_evals,jac_evals,factorizations,linear_solves,metric,value"

METHOD_NAMES = (
    "LEN", "NPE", "A-LEN", "Lazy-CRN", "A-NPE", "EG", "AGD",
    "LEN-restart", "A-LEN-restart",
)
PROBLEM_NAMES = (
    "hard-cubic", "cubic-bilinear", "logistic-synthetic", "logistic",
    "fairness", "affine-cubic",
)


# ---------------------------------------------------------------------------
# Problem construction
# ---------------------------------------------------------------------------

def build_problem(name: str, seed: int = 0, **params) -> ProblemInstance:
    if name == "hard-cubic":
        return problems.make_hard_cubic(int(params.get("n", 25)))
    if name == "cubic-bilinear":
        return problems.make_cubic_bilinear(int(params.get("n", 20)), seed=seed)
    if name == "logistic-synthetic":
        data = problems.gen_synthetic_logistic(
            int(params.get("n", 1000)), int(params.get("d", 200)), seed=seed
        )
        reg = params.get("reg")
        return problems.make_logistic(data, reg=float(reg) if reg is not None else None)
    if name == "logistic":
        data = _load_dataset(params)
        reg = params.get("reg")
        return problems.make_logistic(data, reg=float(reg) if reg is not None else None)
    if name == "fairness":
        data = _load_dataset(params)
        col = params.get("protected_col")
        if col is not None:
            data = problems.with_protected_column(data, int(col))
        return problems.make_fairness(
            data,
            beta=float(params.get("beta", 0.5)),
            lam_x=float(params.get("lam_x", 1e-4)),
            lam_y=float(params.get("lam_y", 1e-4)),
        )
    if name == "affine-cubic":
        return problems.make_affine_cubic(
            int(params.get("n", 20)),
            mu=float(params.get("mu", 1.0)),
            rho=float(params.get("rho", 0.5)),
            seed=seed,
        )
    raise ConfigError(f"unknown problem {name!r}; valid names: {', '.join(PROBLEM_NAMES)}")


def _load_dataset(params) -> problems.Dataset:
    path = params.get("data")
    if not path:
        raise ConfigError("this problem needs a dataset file via data=<path>")
    if not os.path.exists(path):
        raise ConfigError(f"dataset file not found: {path}")
    return problems.read_libsvm(path)


# ---------------------------------------------------------------------------
# Reference values
# ---------------------------------------------------------------------------

_REFERENCE_CACHE: dict[str, float] = {}


def compute_reference(problem: ProblemInstance, budget: int = 100_000) -> float:
    """Best objective value found by long baseline runs, cached per problem.

    Runs grid-tuned AGD and a lazy Newton descent and keeps the lower final
    value.  Runs stop early once the gradient norm falls below 1e-12.
    """
    if problem.kind is not ProblemKind.MIN:
        raise ConfigError("reference values only exist for minimization problems")
    if budget <= 0:
        raise ConfigError("budget must be positive")
    key = f"{problem.name}|{budget}"
    if key in _REFERENCE_CACHE:
        return _REFERENCE_CACHE[key]
    z0 = np.zeros(problem.dim)
    best = problems.eval_value(problem, z0)
    for eta in baselines.STEPSIZE_GRID:
        try:
            x, _, _ = agd_run(
                problem, z0, FirstOrderConfig(stepsize=eta, max_steps=budget, tolerance=1e-12)
            )
        except Exception:
            continue
        best = min(best, problems.eval_value(problem, x))
    newton_steps = min(budget, 300)
    try:
        out = lazy_crn_run(problem, z0, steps=newton_steps, m=1,
                           m_reg=problem.lipschitz_L, tol=1e-12)
        best = min(best, problems.eval_value(problem, out.z))
    except Exception:
        pass
    _REFERENCE_CACHE[key] = best
    return best


# ---------------------------------------------------------------------------
# Experiment configs
# ---------------------------------------------------------------------------

@dataclass
class MethodSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    problems: list[tuple[str, dict]]
    methods: list[MethodSpec]
    seeds: list[int] = field(default_factory=lambda: [0])
    steps: int = 100
    tolerance: float = 0.0
    ref_budget: int = 100_000


def _parse_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    probs: list[tuple[str, dict]] = []
    methods: list[MethodSpec] = []
    seeds = [0]
    steps = 100
    tolerance = 0.0
    ref_budget = 100_000
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "experiment":
            if "seeds" in items:
                seeds = [int(s) for s in _parse_list(items["seeds"])]
            steps = int(items.get("steps", steps))
            tolerance = float(items.get("tolerance", tolerance))
            ref_budget = int(items.get("ref_budget", ref_budget))
        elif section == "problem" or section.startswith("problem."):
            name = items.pop("name", None)
            if name is None:
                raise ConfigError(f"section [{section}] needs a name = <problem>")
            if name not in PROBLEM_NAMES:
                raise ConfigError(
                    f"unknown problem {name!r}; valid names: {', '.join(PROBLEM_NAMES)}"
                )
            probs.append((name, items))
        elif section.startswith("method."):
            name = section[len("method."):]
            if name not in METHOD_NAMES:
                raise ConfigError(
                    f"unknown method {name!r}; valid names: {', '.join(METHOD_NAMES)}"
                )
            methods.append(MethodSpec(name=name, params=items))
        else:
            raise ConfigError(f"unknown config section [{section}]")
    if not probs:
        raise ConfigError("config defines no problems")
    if not methods:
        raise ConfigError("config defines no methods")
    return ExperimentConfig(
        problems=probs, methods=methods, seeds=seeds, steps=steps,
        tolerance=tolerance, ref_budget=ref_budget,
    )


def _grid(spec: MethodSpec):
    """Expand the per-method hyperparameter lists into a run grid."""
    if spec.name in ("EG", "AGD"):
        values = spec.params.get("stepsize")
        grid = [float(v) for v in _parse_list(values)] if values else list(baselines.STEPSIZE_GRID)
        return [("stepsize", v) for v in grid]
    values = spec.params.get("m")
    grid = [int(v) for v in _parse_list(values)] if values else [1]
    return [("m", v) for v in grid]


def run_single(
    problem: ProblemInstance,
    method: str,
    *,
    steps: int,
    tolerance: float = 0.0,
    m: int = 1,
    stepsize: float = 0.1,
    m_reg: Optional[float] = None,
    gamma: Optional[float] = None,
    alpha: float = 2.0,
    eps: float = 1e-6,
    f_star: Optional[float] = None,
) -> RunTrace:
    """Run one (problem, method, hyperparameter) combination."""
    z0 = np.zeros(problem.dim)
    if method == "LEN":
        out = len_run(problem, z0, LenConfig(max_steps=steps, laziness=m, m_reg=m_reg,
                                             tolerance=tolerance))
        trace = out.trace
    elif method == "NPE":
        out = npe_run(problem, z0, LenConfig(max_steps=steps, m_reg=m_reg, tolerance=tolerance))
        trace = out.trace
    elif method == "A-LEN":
        cfg = MsConfig(gamma=gamma if gamma is not None else problem.lipschitz_L / m, laziness=m,
                       m_reg=m_reg)
        out = alen_run(problem, z0, max_outer=steps, alpha=alpha, ms_cfg=cfg,
                       tol=tolerance, f_star=f_star)
        trace = out.trace
    elif method == "Lazy-CRN":
        out = lazy_crn_run(problem, z0, steps=steps, m=m, m_reg=m_reg, tol=tolerance,
                           f_star=f_star)
        trace = out.trace
    elif method == "A-NPE":
        out = anpe_run(problem, z0, max_outer=steps, alpha=alpha, tol=tolerance, f_star=f_star)
        trace = out.trace
    elif method == "EG":
        _, trace, _ = eg_run(problem, z0, FirstOrderConfig(stepsize=stepsize, max_steps=steps,
                                                           tolerance=tolerance))
    elif method == "AGD":
        _, trace, _ = agd_run(problem, z0, FirstOrderConfig(stepsize=stepsize, max_steps=steps,
                                                            tolerance=tolerance), f_star=f_star)
    elif method == "LEN-restart":
        cfg = RestartConfig(target_eps=eps, laziness=m, m_reg=m_reg)
        _, trace, _ = len_restart(problem, z0, cfg)
    elif method == "A-LEN-restart":
        cfg = RestartConfig(target_eps=eps, laziness=m)
        ms_cfg = MsConfig(gamma=gamma if gamma is not None else problem.lipschitz_L / m,
                          laziness=m)
        _, trace, _ = alen_restart(problem, z0, cfg, ms_cfg=ms_cfg, alpha=alpha)
    else:
        raise ConfigError(f"unknown method {method!r}; valid names: {', '.join(METHOD_NAMES)}")
    return trace


def run_experiment(config: ExperimentConfig) -> list[RunTrace]:
    """Execute the full (problem x method x grid x seed) cross product."""
    traces: list[RunTrace] = []
    for prob_name, prob_params in config.problems:
        for seed in config.seeds:
            problem = build_problem(prob_name, seed=seed, **prob_params)
            f_star = problem.reference_value
            needs_gap = problem.kind is ProblemKind.MIN and any(
                spec.name in ("A-LEN", "Lazy-CRN", "A-NPE", "AGD") for spec in config.methods
            )
            if f_star is None and needs_gap:
                f_star = compute_reference(problem, budget=config.ref_budget)
            for spec in config.methods:
                steps = int(spec.params.get("steps", config.steps))
                kwargs = dict(
                    steps=steps,
                    tolerance=float(spec.params.get("tolerance", config.tolerance)),
                    alpha=float(spec.params.get("alpha", 2.0)),
                    eps=float(spec.params.get("eps", 1e-6)),
                    f_star=f_star,
                )
                if "m_reg" in spec.params:
                    kwargs["m_reg"] = float(spec.params["m_reg"])
                if "gamma" in spec.params:
                    kwargs["gamma"] = float(spec.params["gamma"])
                for key, value in _grid(spec):
                    trace = run_single(problem, spec.name, **{**kwargs, key: value})
                    trace.metadata.setdefault("problem", problem.name)
                    trace.metadata["seed"] = seed
                    traces.append(trace)
    return traces


def select_best(traces: list[RunTrace], metric: str) -> RunTrace:
    """Pick the trace with the lowest final value of ``metric``."""
    def final(tr):
        for rec in reversed(tr.records):
            if metric in rec.metrics:
                return rec.metrics[metric]
        return math.inf
    return min(traces, key=final)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_csv(trace: RunTrace, path: str):
    """Write one run trace; metadata goes into leading ``# key=value`` lines."""
    lines = []
    for key in sorted(trace.metadata):
        lines.append(f"# {key}={trace.metadata[key]}")
    lines.append(CSV_HEADER)
    for rec in trace.records:
        c = rec.counters
        prefix = (
            f"{rec.iter},{_fmt(rec.wall_time_s)},{c.grad_evals},{c.jac_evals},"
            f"{c.factorizations},{c.linear_solves}"
        )
        for name in sorted(rec.metrics):
            lines.append(f"{prefix},{name},{_fmt(rec.metrics[name])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str):
    """Parse a trace CSV back into (metadata, rows-of-dicts)."""
    metadata: dict[str, str] = {}
    rows: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise ConfigError(f"unexpected CSV header in {path}: {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            rows.append({
                "iter": int(parts[0]),
                "wall_time_s": float(parts[1]),
                "grad_evals": int(parts[2]),
                "jac_evals": int(parts[3]),
                "factorizations": int(parts[4]),
                "linear_solves": int(parts[5]),
                "metric": parts[6],
                "value": float(parts[7]),
            })
    return metadata, rows
