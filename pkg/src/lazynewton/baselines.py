"""First-order baselines: extragradient and accelerated gradient descent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, Divergence, UnsupportedOperation
from .problems import ProblemInstance, ProblemKind, eval_operator, eval_value
from .trace import OracleCounters, RunTrace

STEPSIZE_GRID = (1.0, 0.1, 0.01, 0.001)

_DIVERGENCE_RADIUS = 1e12


@dataclass
class FirstOrderConfig:
    stepsize: float
    max_steps: int
    tolerance: float = 0.0

    def validate(self):
        if self.stepsize <= 0:
            raise ConfigError("stepsize must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")


def _check_bounded(z, stepsize, step_idx):
    if not np.all(np.isfinite(z)) or np.linalg.norm(z) > _DIVERGENCE_RADIUS:
        raise Divergence(
            f"iterate diverged at step {step_idx} with stepsize {stepsize:g}"
        )


def eg_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    cfg: FirstOrderConfig,
    counters: Optional[OracleCounters] = None,
    f_star: Optional[float] = None,
):
    """Extragradient: probe step at z_t, correction step at the probe point."""
    cfg.validate()
    counters = counters if counters is not None else OracleCounters()
    eta = cfg.stepsize
    trace = RunTrace(metadata={
        "method": "EG", "problem": problem.name, "stepsize": eta,
    })
    z = np.asarray(z0, dtype=float).copy()
    for t in range(cfg.max_steps):
        f_t = eval_operator(problem, z, counters)
        gn = float(np.linalg.norm(f_t))
        metrics = {"grad_norm": gn}
        if problem.known_solution is not None:
            metrics["dist_sq"] = float(np.sum((z - problem.known_solution) ** 2))
        trace.add(t, counters, metrics)
        if gn <= cfg.tolerance:
            break
        z_half = z - eta * f_t
        f_half = eval_operator(problem, z_half, counters)
        z = z - eta * f_half
        _check_bounded(z, eta, t)
    return z, trace, counters


def agd_run(
    problem: ProblemInstance,
    x0: np.ndarray,
    cfg: FirstOrderConfig,
    counters: Optional[OracleCounters] = None,
    f_star: Optional[float] = None,
):
    """Constant-stepsize accelerated gradient descent with t/(t+3) momentum."""
    cfg.validate()
    if problem.kind is not ProblemKind.MIN:
        raise UnsupportedOperation("agd_run requires a minimization problem")
    counters = counters if counters is not None else OracleCounters()
    eta = cfg.stepsize
    if f_star is None:
        f_star = problem.reference_value
    trace = RunTrace(metadata={
        "method": "AGD", "problem": problem.name, "stepsize": eta,
        "momentum": "t/(t+3)",
    })
    x = np.asarray(x0, dtype=float).copy()
    y = x.copy()
    for t in range(cfg.max_steps):
        g = eval_operator(problem, y, counters)
        gn = float(np.linalg.norm(g))
        metrics = {"grad_norm": gn}
        if problem.value is not None and f_star is not None:
            metrics["subopt_gap"] = eval_value(problem, x) - f_star
        trace.add(t, counters, metrics)
        if gn <= cfg.tolerance:
            break
        x_next = y - eta * g
        y = x_next + (t / (t + 3.0)) * (x_next - x)
        x = x_next
        _check_bounded(x, eta, t)
    return x, trace, counters
