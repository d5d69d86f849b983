"""Epoch-restart wrappers for strongly monotone / strongly convex problems.

Re-running the sublinear inner solver for a fixed per-epoch budget and
feeding its output back as the next start turns the sublinear rate into
superlinear contraction of the distance to the unique root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .alen import AccelOutput, MsConfig, alen_run
from .errors import ConfigError
from .len_solver import LenConfig, len_run
from .problems import ProblemInstance, ProblemKind, eval_operator, eval_value
from .trace import OracleCounters, RunTrace


@dataclass
class RestartConfig:
    target_eps: float
    epochs: Optional[int] = None        # None resolves to ceil(log_{3/2} log_2(1/eps))
    epoch_budget: Optional[int] = None  # None resolves from the contraction formula
    laziness: int = 1
    m_reg: Optional[float] = None       # None resolves to 4 * m * L
    radius_bound: Optional[float] = None  # None resolves to ||F(z0)|| / mu

    def validate(self):
        if self.target_eps <= 0:
            raise ConfigError("target_eps must be positive")
        if self.laziness < 1:
            raise ConfigError("laziness must be >= 1")

    def resolve_epochs(self) -> int:
        if self.epochs is not None:
            return self.epochs
        log2_inv = math.log2(1.0 / self.target_eps)
        if log2_inv <= 1.0:
            return 1
        return max(1, math.ceil(math.log(log2_inv, 1.5)))


def _radius_bound(problem, z0, cfg, counters):
    if cfg.radius_bound is not None:
        return cfg.radius_bound
    # mu-strong monotonicity gives ||z0 - z*|| <= ||F(z0)|| / mu
    return float(np.linalg.norm(eval_operator(problem, z0, counters))) / problem.strong_mu


def len_restart(
    problem: ProblemInstance,
    z0: np.ndarray,
    cfg: RestartConfig,
    counters: Optional[OracleCounters] = None,
):
    """Restarted lazy extra-Newton loop; superlinear under strong monotonicity."""
    cfg.validate()
    if problem.strong_mu <= 0:
        raise ConfigError("len_restart requires strong_mu > 0")
    counters = counters if counters is not None else OracleCounters()
    m = cfg.laziness
    m_reg = cfg.m_reg if cfg.m_reg is not None else 4.0 * m * problem.lipschitz_L
    r0 = _radius_bound(problem, z0, cfg, counters)
    if cfg.epoch_budget is not None:
        t_budget = cfg.epoch_budget
    else:
        t_budget = max(1, math.ceil((2.0 * m_reg * r0 / problem.strong_mu) ** (2.0 / 3.0)))
    s_epochs = cfg.resolve_epochs()

    trace = RunTrace(metadata={
        "method": "LEN-restart", "problem": problem.name, "m": m, "M": m_reg,
        "epochs": s_epochs, "epoch_budget": t_budget, "radius_bound": r0,
    })
    z = np.asarray(z0, dtype=float).copy()
    epoch_dist = []
    total_steps = 0
    for s in range(s_epochs):
        inner_cfg = LenConfig(max_steps=t_budget, laziness=m, m_reg=m_reg)
        out = len_run(problem, z, inner_cfg, counters=counters)
        z = out.z_out
        total_steps += out.steps
        trace.extend(out.trace)
        if problem.known_solution is not None:
            epoch_dist.append(float(np.sum((z - problem.known_solution) ** 2)))
        if out.steps == 0:
            break  # F(z) = 0: every further epoch is a no-op
    trace.metadata["epoch_dist_sq"] = epoch_dist
    trace.metadata["steps"] = total_steps
    return z, trace, counters


def alen_restart(
    problem: ProblemInstance,
    z0: np.ndarray,
    cfg: RestartConfig,
    ms_cfg: Optional[MsConfig] = None,
    alpha: float = 2.0,
    budget_constant: float = 4.0,
    counters: Optional[OracleCounters] = None,
):
    """Restarted accelerated loop for strongly convex minimization.

    The theory only gives the per-epoch budget up to a constant, so the
    budget doubles whenever an epoch fails to halve its progress metric
    (f-gap when a reference value is known, squared gradient norm
    otherwise); each doubling is recorded in the trace.
    """
    cfg.validate()
    if problem.kind is not ProblemKind.MIN:
        raise ConfigError("alen_restart requires a minimization problem")
    if problem.strong_mu <= 0:
        raise ConfigError("alen_restart requires strong_mu > 0")
    counters = counters if counters is not None else OracleCounters()
    if ms_cfg is None:
        ms_cfg = MsConfig.default(problem, cfg.laziness)
    t_budget = cfg.epoch_budget
    if t_budget is None:
        t_budget = max(1, math.ceil(
            budget_constant * (ms_cfg.gamma / problem.strong_mu) ** (2.0 / 7.0)
        ))
    s_epochs = cfg.resolve_epochs()

    trace = RunTrace(metadata={
        "method": "A-LEN-restart", "problem": problem.name, "m": ms_cfg.laziness,
        "gamma": ms_cfg.gamma, "epochs": s_epochs, "epoch_budget": t_budget,
    })

    def progress(z):
        if problem.reference_value is not None:
            return eval_value(problem, z) - problem.reference_value
        g = problem.operator(z)
        trace.bump_metric_evals(1)
        return float(np.sum(g * g))

    z = np.asarray(z0, dtype=float).copy()
    metric = progress(z)
    doublings = []
    epoch_dist = []
    for s in range(s_epochs):
        out: AccelOutput = alen_run(
            problem, z, max_outer=t_budget, alpha=alpha, ms_cfg=ms_cfg, counters=counters
        )
        z = out.z
        trace.extend(out.trace)
        if problem.known_solution is not None:
            epoch_dist.append(float(np.sum((z - problem.known_solution) ** 2)))
        new_metric = progress(z)
        if new_metric > 0.5 * metric and metric > 0:
            t_budget *= 2
            doublings.append(s)
        metric = new_metric
    trace.metadata["epoch_dist_sq"] = epoch_dist
    trace.metadata["budget_doublings"] = doublings
    return z, trace, counters
