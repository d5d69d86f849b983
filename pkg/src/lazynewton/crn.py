"""Cubic-regularized Newton step over a cached snapshot factorization.

The step h solves  F(zbar) + H h + (M/2)||h|| h = 0  for a (possibly
stale) matrix H.  Writing lambda = (M/2)||h||, h = -(H + lambda*I)^{-1}
F(zbar), so lambda is the root of the strictly decreasing map
psi(lambda) = ||h(lambda)||/lambda - 2/M, found by bracketing and
bisection; every probe is one O(d^2) shifted solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonConvergence, SingularShift
from .shifted import SnapshotFactorization, solve_shifted
from .trace import OracleCounters

_LAMBDA_FLOOR = 1e-300
_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class CrnResult:
    step: np.ndarray
    lam: float
    residual: float  # fixed-point defect |(M/2)||h|| - lambda|
    bisection_iters: int
    solves_used: int
    converged: bool


def _probe(fact, lam, f_val, counters):
    """h(lambda) with a bounded retreat to larger shifts on singularity."""
    for attempt in range(6):
        try:
            return -solve_shifted(fact, lam, f_val, counters), lam
        except SingularShift:
            lam = lam * 4.0 + 1e-12
    raise SingularShift(f"shifted solve kept failing up to lambda={lam:.3e}")


def crn_step(
    f_val: np.ndarray,
    fact: SnapshotFactorization,
    m_reg: float,
    warm_lambda: Optional[float] = None,
    counters: Optional[OracleCounters] = None,
) -> CrnResult:
    """Compute the regularized Newton step for operator value ``f_val``."""
    if m_reg <= 0:
        raise ValueError("m_reg must be positive")
    f_val = np.asarray(f_val, dtype=float)
    norm_f = float(np.linalg.norm(f_val))
    if norm_f == 0.0:
        return CrnResult(
            step=np.zeros(fact.dim), lam=0.0, residual=0.0,
            bisection_iters=0, solves_used=0, converged=True,
        )

    solves = 0

    def h_at(lam):
        nonlocal solves
        h, lam_used = _probe(fact, lam, f_val, counters)
        solves += 1
        return h, lam_used

    def psi(norm_h, lam):
        return norm_h / lam - 2.0 / m_reg

    lam = warm_lambda if warm_lambda and warm_lambda > 0 else 1.0
    lam = max(lam, _LAMBDA_FLOOR)
    h, lam = h_at(lam)
    nh = np.linalg.norm(h)

    tol_for = lambda lam_, nh_: 0.5 * min(
        1e-8 * (1.0 + lam_), 1e-8 * (1.0 + norm_f) / max(nh_, 1e-30)
    )

    def done(lam_, nh_):
        return abs(m_reg / 2.0 * nh_ - lam_) <= tol_for(lam_, nh_)

    iters = 0
    if done(lam, nh):
        return CrnResult(h, lam, abs(m_reg / 2.0 * nh - lam), iters, solves, True)

    # bracket the root by multiplicative expansion
    if psi(nh, lam) > 0.0:  # lambda too small
        lo, f_lo = lam, 1.0
        while True:
            iters += 1
            hi = lo * 2.0
            h, hi = h_at(hi)
            nh = np.linalg.norm(h)
            if done(hi, nh):
                return CrnResult(h, hi, abs(m_reg / 2.0 * nh - hi), iters, solves, True)
            if psi(nh, hi) <= 0.0:
                break
            lo = hi
            if iters > _MAX_BISECTIONS:
                raise NonConvergence(
                    f"bracket expansion failed: lambda={hi:.3e}, ||F||={norm_f:.3e}"
                )
    else:  # lambda too large
        hi = lam
        while True:
            iters += 1
            lo = max(hi / 2.0, _LAMBDA_FLOOR)
            h, lo = h_at(lo)
            nh = np.linalg.norm(h)
            if done(lo, nh):
                return CrnResult(h, lo, abs(m_reg / 2.0 * nh - lo), iters, solves, True)
            if psi(nh, lo) >= 0.0:
                break
            hi = lo
            if iters > _MAX_BISECTIONS:
                raise NonConvergence(
                    f"bracket shrink failed: lambda={lo:.3e}, ||F||={norm_f:.3e}"
                )

    # bisect on [lo, hi] with psi(lo) > 0 > psi(hi)
    while iters < _MAX_BISECTIONS:
        iters += 1
        mid = 0.5 * (lo + hi)
        h, mid = h_at(mid)
        nh = np.linalg.norm(h)
        if done(mid, nh) or (hi - lo) <= 1e-13 * hi:
            return CrnResult(h, mid, abs(m_reg / 2.0 * nh - mid), iters, solves, True)
        if psi(nh, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    raise NonConvergence(
        f"bisection exceeded {_MAX_BISECTIONS} iterations; bracket=[{lo:.6e}, {hi:.6e}], "
        f"||F||={norm_f:.3e}, M={m_reg:.3e}"
    )
