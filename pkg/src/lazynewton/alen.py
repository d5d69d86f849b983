"""Accelerated lazy extra-Newton method for convex minimization.

The outer loop is a search-free accelerated proximal-point recursion
driven by an oracle returning a pair (z, lambda) that satisfies an
approximate proximal condition and the movement bound
||z - zbar|| >= lambda/gamma.  The inner solver produces such pairs by
lazily minimizing the cubic proximal model
g(z) = f(z) + (gamma/3)||z - zbar||^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .crn import crn_step
from .errors import ConfigError, NumericalFailure, UnsupportedOperation
from .problems import JacobianMatrix, ProblemInstance, ProblemKind, eval_jacobian, eval_operator, eval_value
from .shifted import factorize
from .trace import OracleCounters, RunTrace


@dataclass
class MsConfig:
    """Inner-solver configuration for the cubic proximal subproblem."""

    gamma: float
    laziness: int = 1
    m_reg: Optional[float] = None   # None resolves to 6 * m * (L + 2*gamma)
    budget: Optional[int] = None    # None resolves to the worst-case K (capped)
    sigma: float = 0.99

    def validate(self):
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.laziness < 1:
            raise ConfigError("laziness must be >= 1")
        if not 0.0 < self.sigma <= 0.99:
            raise ConfigError("sigma must lie in (0, 0.99]")

    @classmethod
    def default(cls, problem: ProblemInstance, m: int = 1) -> "MsConfig":
        return cls(gamma=problem.lipschitz_L / m, laziness=m)

    def resolve(self, lipschitz_L: float):
        """Return (M, K, S, capped) for the given outer Lipschitz constant."""
        m = self.laziness
        m_reg = self.m_reg if self.m_reg is not None else 6.0 * m * (lipschitz_L + 2.0 * self.gamma)
        if self.budget is not None:
            k = self.budget
            capped = False
        else:
            c = 1.0 / (2.0 * (1.0 + 2.0 * self.sigma))
            log_arg = lipschitz_L / (c * self.gamma)
            k_auto = math.ceil(1.5 * (m + 98.0 * math.sqrt(m_reg / self.gamma)) * max(math.log(log_arg), 0.0)) if log_arg > 0 else m
            k_cap = math.ceil(
                10.0 * (m + math.sqrt(m_reg / self.gamma)) * math.log(10.0 + lipschitz_L / self.gamma)
            )
            capped = k_auto > k_cap
            k = min(k_auto, k_cap)
        k = max(k, m)
        s = math.ceil(k / m)
        return m_reg, k, s, capped


@dataclass
class MsResult:
    z_ms: np.ndarray
    lam: float
    verified: bool
    jac_evals_used: int
    inner_trace: RunTrace


def _proximal_oracles(problem: ProblemInstance, z_bar: np.ndarray, gamma: float,
                      counters: OracleCounters):
    """Gradient / Hessian / value of g(z) = f(z) + (gamma/3)||z - zbar||^3."""

    def grad_g(z):
        w = z - z_bar
        return eval_operator(problem, z, counters) + gamma * np.linalg.norm(w) * w

    def hess_g(z):
        w = z - z_bar
        nw = np.linalg.norm(w)
        base = eval_jacobian(problem, z, counters).entries
        if nw > 0:
            base = base + gamma * (nw * np.eye(len(w)) + np.outer(w, w) / nw)
        return JacobianMatrix(entries=base, symmetric=True)

    def val_g(z):
        w = z - z_bar
        return eval_value(problem, z) + gamma / 3.0 * np.linalg.norm(w) ** 3

    return grad_g, hess_g, val_g


def ms_solve(
    problem: ProblemInstance,
    z_bar: np.ndarray,
    cfg: MsConfig,
    counters: Optional[OracleCounters] = None,
) -> MsResult:
    """Produce an oracle pair (z_ms, lambda) for f at the prox center ``z_bar``.

    Runs lazy regularized-Newton epochs on the cubic proximal model and,
    after the bootstrap step and each epoch, tests the verifiable
    certificate ||grad g(z)|| <= sigma * gamma * ||z - zbar||^2 on a
    polish step, stopping early on success.  Jacobian evaluations are
    bounded by (#epochs run) + 2.
    """
    if problem.kind is not ProblemKind.MIN:
        raise UnsupportedOperation("ms_solve requires a minimization problem")
    cfg.validate()
    counters = counters if counters is not None else OracleCounters()
    gamma, m, sigma = cfg.gamma, cfg.laziness, cfg.sigma
    m_reg, k_budget, s_epochs, capped = cfg.resolve(problem.lipschitz_L)
    lip_g = problem.lipschitz_L + 2.0 * gamma  # Hessian-Lipschitz constant of g
    grad_g, hess_g, _ = _proximal_oracles(problem, z_bar, gamma, counters)
    trace = RunTrace(metadata={
        "method": "MS-Solver", "problem": problem.name, "m": m,
        "M": m_reg, "gamma": gamma, "K": k_budget, "budget_capped": capped,
    })
    jac0 = counters.jac_evals

    def certified(z, gz_norm):
        return gz_norm <= sigma * gamma * np.sum((z - z_bar) ** 2)

    def result(z, verified):
        lam = gamma * float(np.linalg.norm(z - z_bar))
        trace.metadata["verified"] = verified
        return MsResult(z, lam, verified, counters.jac_evals - jac0, trace)

    g_bar = grad_g(z_bar)  # equals grad f(zbar): the cubic term vanishes at its center
    if np.linalg.norm(g_bar) == 0.0:
        return result(z_bar.copy(), True)

    # bootstrap: one polished step from the prox center itself
    fact = factorize(hess_g(z_bar), counters)
    z_cur = z_bar + crn_step(g_bar, fact, lip_g, counters=counters).step

    for s in range(s_epochs):
        fact = factorize(hess_g(z_cur), counters)
        g_cur = grad_g(z_cur)
        cand = z_cur + crn_step(g_cur, fact, lip_g, counters=counters).step
        g_cand = grad_g(cand)
        gn = float(np.linalg.norm(g_cand))
        trace.add(trace.last_iter() + 1, counters, {"prox_grad_norm": gn})
        if certified(cand, gn):
            return result(cand, True)
        # lazy epoch: m regularized steps sharing this snapshot
        z_run = z_cur
        z_sum = np.zeros_like(z_cur)
        warm = None
        for _ in range(m):
            res = crn_step(grad_g(z_run), fact, m_reg, warm_lambda=warm, counters=counters)
            warm = res.lam if res.lam > 0 else None
            z_run = z_run + res.step
            z_sum += z_run
        z_cur = z_sum / m

    fact = factorize(hess_g(z_cur), counters)
    cand = z_cur + crn_step(grad_g(z_cur), fact, lip_g, counters=counters).step
    gn = float(np.linalg.norm(grad_g(cand)))
    trace.add(trace.last_iter() + 1, counters, {"prox_grad_norm": gn})
    return result(cand, certified(cand, gn))


# ---------------------------------------------------------------------------
# Accelerated outer loop
# ---------------------------------------------------------------------------

@dataclass
class AccelOutput:
    z: np.ndarray
    trace: RunTrace
    counters: OracleCounters
    unverified_oracles: int = 0


def _outer_metrics(problem, z, f_star, trace, counters):
    metrics = {}
    g = problem.operator(z)
    trace.bump_metric_evals(1)
    metrics["grad_norm"] = float(np.linalg.norm(g))
    if problem.value is not None and f_star is not None:
        metrics["subopt_gap"] = eval_value(problem, z) - f_star
    if problem.known_solution is not None:
        metrics["dist_sq"] = float(np.sum((z - problem.known_solution) ** 2))
    trace.add(trace.last_iter() + 1, counters, metrics)
    return metrics


def _accelerated_loop(
    problem: ProblemInstance,
    z0: np.ndarray,
    max_outer: int,
    alpha: float,
    gamma: float,
    oracle: Callable[[np.ndarray], tuple[np.ndarray, float, bool]],
    tol: float,
    counters: OracleCounters,
    trace: RunTrace,
    f_star: Optional[float],
) -> AccelOutput:
    """Momentum recursion shared by the accelerated solvers.

    ``oracle(zbar)`` returns (z_tilde, lambda, verified) with
    lambda = gamma * ||z_tilde - zbar||.
    """
    if alpha <= 1.0:
        raise ConfigError("alpha must be > 1")
    z = np.asarray(z0, dtype=float).copy()
    v = z.copy()
    a_total = 0.0
    unverified = 0

    z_tilde, lam, ok = oracle(z)
    if not ok:
        unverified += 1
    if lam == 0.0:
        _outer_metrics(problem, z_tilde, f_star, trace, counters)
        return AccelOutput(z_tilde, trace, counters, unverified)
    lam_guess = lam

    for t in range(max_outer):
        a_prime = (1.0 + math.sqrt(1.0 + 4.0 * lam_guess * a_total)) / (2.0 * lam_guess)
        a_total_prime = a_total + a_prime
        z_bar = (a_total / a_total_prime) * z + (a_prime / a_total_prime) * v
        if t > 0:
            z_tilde, lam, ok = oracle(z_bar)
            if not ok:
                unverified += 1
            if lam == 0.0:
                z = z_tilde
                _outer_metrics(problem, z, f_star, trace, counters)
                break
        if lam <= lam_guess:
            a_step = a_prime
            a_total = a_total_prime
            z = z_tilde
            lam_guess = lam_guess / alpha
        else:
            ratio = lam_guess / lam
            a_step = ratio * a_prime
            a_total_new = a_total + a_step
            z = ((1.0 - ratio) * a_total / a_total_new) * z \
                + (ratio * a_total_prime / a_total_new) * z_tilde
            a_total = a_total_new
            lam_guess = alpha * lam_guess
        v = v - a_step * eval_operator(problem, z_tilde, counters)
        if not np.all(np.isfinite(z)):
            raise NumericalFailure(f"non-finite iterate at outer step {t}")
        metrics = _outer_metrics(problem, z, f_star, trace, counters)
        gap = metrics.get("subopt_gap")
        if gap is not None and gap <= tol:
            break
        if gap is None and metrics["grad_norm"] <= tol:
            break
    trace.metadata["unverified_oracles"] = unverified
    return AccelOutput(z, trace, counters, unverified)


def alen_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    max_outer: int,
    alpha: float = 2.0,
    ms_cfg: Optional[MsConfig] = None,
    tol: float = 0.0,
    counters: Optional[OracleCounters] = None,
    f_star: Optional[float] = None,
) -> AccelOutput:
    """Accelerated outer loop with the lazy inner solver as its oracle."""
    if problem.kind is not ProblemKind.MIN:
        raise UnsupportedOperation("alen_run requires a minimization problem")
    if ms_cfg is None:
        ms_cfg = MsConfig.default(problem)
    ms_cfg.validate()
    counters = counters if counters is not None else OracleCounters()
    if f_star is None:
        f_star = problem.reference_value
    trace = RunTrace(metadata={
        "method": "A-LEN", "problem": problem.name, "m": ms_cfg.laziness,
        "gamma": ms_cfg.gamma, "alpha": alpha,
    })

    def oracle(z_bar):
        res = ms_solve(problem, z_bar, ms_cfg, counters=counters)
        return res.z_ms, res.lam, res.verified

    return _accelerated_loop(
        problem, z0, max_outer, alpha, ms_cfg.gamma, oracle, tol, counters, trace, f_star
    )


def anpe_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    max_outer: int,
    alpha: float = 2.0,
    tol: float = 0.0,
    counters: Optional[OracleCounters] = None,
    f_star: Optional[float] = None,
) -> AccelOutput:
    """Accelerated baseline: one fresh regularized Newton step per oracle call.

    The step uses regularization 2L, giving an oracle with sigma = 1/2 and
    movement constant gamma = L.
    """
    if problem.kind is not ProblemKind.MIN:
        raise UnsupportedOperation("anpe_run requires a minimization problem")
    counters = counters if counters is not None else OracleCounters()
    if f_star is None:
        f_star = problem.reference_value
    lip = problem.lipschitz_L
    m_reg = 2.0 * lip
    trace = RunTrace(metadata={"method": "A-NPE", "problem": problem.name, "alpha": alpha})

    def oracle(z_bar):
        f_val = eval_operator(problem, z_bar, counters)
        fact = factorize(eval_jacobian(problem, z_bar, counters), counters)
        res = crn_step(f_val, fact, m_reg, counters=counters)
        lam = m_reg / 2.0 * float(np.linalg.norm(res.step))
        return z_bar + res.step, lam, True

    return _accelerated_loop(
        problem, z0, max_outer, alpha, lip, oracle, tol, counters, trace, f_star
    )


def lazy_crn_run(
    problem: ProblemInstance,
    z0: np.ndarray,
    steps: int,
    m: int = 1,
    m_reg: Optional[float] = None,
    tol: float = 0.0,
    counters: Optional[OracleCounters] = None,
    f_star: Optional[float] = None,
) -> AccelOutput:
    """Plain lazy regularized Newton descent on f (no averaging, no prox term)."""
    if problem.kind is not ProblemKind.MIN:
        raise UnsupportedOperation("lazy_crn_run requires a minimization problem")
    if m < 1:
        raise ConfigError("m must be >= 1")
    counters = counters if counters is not None else OracleCounters()
    if f_star is None:
        f_star = problem.reference_value
    if m_reg is None:
        m_reg = 6.0 * m * problem.lipschitz_L
    trace = RunTrace(metadata={
        "method": "Lazy-CRN", "problem": problem.name, "m": m, "M": m_reg,
    })
    z = np.asarray(z0, dtype=float).copy()
    fact = None
    warm = None
    for t in range(steps):
        f_val = eval_operator(problem, z, counters)
        gn = float(np.linalg.norm(f_val))
        if gn <= tol:
            break
        if t % m == 0:
            fact = factorize(eval_jacobian(problem, z, counters), counters)
        res = crn_step(f_val, fact, m_reg, warm_lambda=warm, counters=counters)
        warm = res.lam if res.lam > 0 else None
        z = z + res.step
        metrics = {"grad_norm": gn}
        if problem.value is not None and f_star is not None:
            metrics["subopt_gap"] = eval_value(problem, z) - f_star
        if problem.known_solution is not None:
            metrics["dist_sq"] = float(np.sum((z - problem.known_solution) ** 2))
        trace.add(t, counters, metrics)
    return AccelOutput(z, trace, counters)
