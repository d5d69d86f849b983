"""Lazy extra-Newton loop for monotone nonlinear equations.

Each step takes a regularized Newton half-step using the most recent
snapshot Jacobian (refreshed every ``laziness`` steps), then an
extragradient correction with stepsize 1/(M ||z_t - z_{t+1/2}||).  The
returned point is the stepsize-weighted average of the half-steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .crn import crn_step
from .errors import ConfigError, NumericalFailure
from .problems import ProblemInstance, eval_jacobian, eval_operator, eval_value
from .shifted import factorize
from .trace import OracleCounters, RunTrace


@dataclass
class LenConfig:
    max_steps: int
    laziness: int = 1
    m_reg: Optional[float] = None  # None resolves to 4 * laziness * L
    tolerance: float = 0.0
    record_trace: bool = True

    def validate(self):
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.laziness < 1:
            raise ConfigError("laziness must be >= 1")
        if self.m_reg is not None and self.m_reg <= 0:
            raise ConfigError("m_reg must be positive")

    def resolve_m_reg(self, lipschitz_L: float) -> float:
        if self.m_reg is not None:
            return self.m_reg
        return 4.0 * self.laziness * lipschitz_L


@dataclass
class LenOutput:
    z_out: np.ndarray
    z_last: np.ndarray
    eta_weights: list = field(default_factory=list)
    trace: RunTrace = field(default_factory=RunTrace)
    counters: OracleCounters = field(default_factory=OracleCounters)
    steps: int = 0


def _record_metrics(trace, problem, it, counters, grad_norm, z_next):
    metrics = {"grad_norm": grad_norm}
    if problem.known_solution is not None:
        metrics["dist_sq"] = float(np.sum((z_next - problem.known_solution) ** 2))
    if problem.value is not None and problem.reference_value is not None:
        metrics["subopt_gap"] = eval_value(problem, z_next) - problem.reference_value
    trace.add(it, counters, metrics)


def len_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    cfg: LenConfig,
    counters: Optional[OracleCounters] = None,
) -> LenOutput:
    """Run the lazy extra-Newton loop from ``z0``."""
    cfg.validate()
    m = cfg.laziness
    m_reg = cfg.resolve_m_reg(problem.lipschitz_L)
    counters = counters if counters is not None else OracleCounters()
    trace = RunTrace(metadata={
        "method": "LEN", "problem": problem.name, "m": m, "M": m_reg,
        "tolerance": cfg.tolerance,
    })

    z = np.asarray(z0, dtype=float).copy()
    fact = None
    warm_lambda = None
    eta_sum = 0.0
    z_avg_accum = np.zeros(problem.dim)
    etas: list[float] = []
    steps_done = 0

    for t in range(cfg.max_steps):
        f_t = eval_operator(problem, z, counters)
        norm_f_t = np.linalg.norm(f_t)
        if norm_f_t <= cfg.tolerance:
            break
        if t % m == 0:
            fact = factorize(eval_jacobian(problem, z, counters), counters)
        try:
            res = crn_step(f_t, fact, m_reg, warm_lambda=warm_lambda, counters=counters)
        except NumericalFailure as exc:
            raise NumericalFailure(f"CRN step failed at iteration {t}: {exc}") from exc
        warm_lambda = res.lam if res.lam > 0 else None
        z_half = z + res.step
        step_norm = np.linalg.norm(res.step)
        if step_norm == 0.0:
            # exact CRN forces F(z_t) = 0 here; numerically, treat as converged
            break
        if not np.all(np.isfinite(z_half)):
            raise NumericalFailure(f"non-finite iterate at step {t}")

        f_half = eval_operator(problem, z_half, counters)
        eta = 1.0 / (m_reg * step_norm)
        etas.append(eta)
        eta_sum += eta
        z_avg_accum += eta * z_half
        z = z - eta * f_half
        steps_done += 1
        grad_norm = float(np.linalg.norm(f_half))
        if cfg.record_trace:
            _record_metrics(trace, problem, trace.last_iter() + 1, counters, grad_norm, z)
        if grad_norm <= cfg.tolerance:
            z = z_half  # the half-point is the iterate that certified convergence
            break

    z_out = z_avg_accum / eta_sum if eta_sum > 0 else z.copy()
    trace.metadata["steps"] = steps_done
    return LenOutput(
        z_out=z_out, z_last=z, eta_weights=etas, trace=trace,
        counters=counters, steps=steps_done,
    )


def npe_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    cfg: LenConfig,
    counters: Optional[OracleCounters] = None,
) -> LenOutput:
    """Non-lazy special case: a fresh Jacobian every step."""
    eager = LenConfig(
        max_steps=cfg.max_steps, laziness=1, m_reg=cfg.m_reg,
        tolerance=cfg.tolerance, record_trace=cfg.record_trace,
    )
    out = len_run(problem, z0, eager, counters=counters)
    out.trace.metadata["method"] = "NPE"
    return out
