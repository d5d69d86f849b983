"""Snapshot factorization and O(d^2) shifted solves.

One real Schur factorization of the snapshot Jacobian H = Q U Q^T (an
orthogonal eigendecomposition on the symmetric path) answers every
(H + lambda*I) h = g solve during a lazy epoch by two orthogonal
multiplies and a quasi-triangular back substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, SingularShift
from .problems import JacobianMatrix
from .trace import OracleCounters


@dataclass(frozen=True)
class SnapshotFactorization:
    """H = q @ u @ q.T with orthogonal q and quasi-upper-triangular u.

    For symmetric H, u is diagonal and ``eigvals`` holds its diagonal for
    the fast solve path.
    """

    q: np.ndarray
    u: np.ndarray
    symmetric: bool
    dim: int
    eigvals: Optional[np.ndarray] = None


def factorize(
    h_matrix: JacobianMatrix, counters: Optional[OracleCounters] = None
) -> SnapshotFactorization:
    """Compute the snapshot factorization; one factorization-counter tick."""
    h = np.asarray(h_matrix.entries, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NumericalFailure(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericalFailure("snapshot matrix has non-finite entries")
    d = h.shape[0]
    try:
        if h_matrix.symmetric:
            w, q = scipy.linalg.eigh(h)
            u = np.diag(w)
            fact = SnapshotFactorization(q=q, u=u, symmetric=True, dim=d, eigvals=w)
        else:
            u, q = scipy.linalg.schur(h, output="real")
            fact = SnapshotFactorization(q=q, u=u, symmetric=False, dim=d)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"factorization failed for matrix with norm {np.linalg.norm(h, np.inf):.3e}: {exc}"
        ) from exc
    if counters is not None:
        counters.factorizations += 1
    return fact


_PANEL = 64


def _solve_quasi_triangular(u: np.ndarray, lam: float, y: np.ndarray) -> np.ndarray:
    """Back-substitute (u + lam*I) x = y for quasi-upper-triangular u.

    Rows are processed in panels so the trailing-column update is one GEMV
    per panel instead of one dot per row; the per-row work stays inside the
    current panel.
    """
    d = y.shape[0]
    x = np.zeros(d)
    y = y.copy()
    end = d
    while end > 0:
        start = max(0, end - _PANEL)
        if start > 0 and u[start, start - 1] != 0.0:
            start -= 1  # never split a 2x2 block across panels
        i = end - 1
        while i >= start:
            if i > start and u[i, i - 1] != 0.0:
                a00 = u[i - 1, i - 1] + lam
                a01 = u[i - 1, i]
                a10 = u[i, i - 1]
                a11 = u[i, i] + lam
                tail = u[i - 1 : i + 1, i + 1 : end] @ x[i + 1 : end]
                r0 = y[i - 1] - tail[0]
                r1 = y[i] - tail[1]
                det = a00 * a11 - a01 * a10
                scale = max(abs(a00), abs(a01), abs(a10), abs(a11), 1.0)
                if abs(det) <= 1e-14 * scale * scale:
                    raise SingularShift(f"2x2 block singular at shift lambda={lam:.3e}")
                x[i - 1] = (a11 * r0 - a01 * r1) / det
                x[i] = (a00 * r1 - a10 * r0) / det
                i -= 2
            else:
                denom = u[i, i] + lam
                if abs(denom) <= 1e-14 * (1.0 + abs(u[i, i])):
                    raise SingularShift(f"diagonal entry singular at shift lambda={lam:.3e}")
                x[i] = (y[i] - u[i, i + 1 : end] @ x[i + 1 : end]) / denom
                i -= 1
        if start > 0:
            y[:start] -= u[:start, start:end] @ x[start:end]
        end = start
    return x


def solve_shifted(
    fact: SnapshotFactorization,
    lam: float,
    rhs: np.ndarray,
    counters: Optional[OracleCounters] = None,
) -> np.ndarray:
    """Solve (H + lam*I) h = rhs through the cached factorization."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (fact.dim,):
        raise NumericalFailure(f"rhs has shape {rhs.shape}, expected ({fact.dim},)")
    y = fact.q.T @ rhs
    if fact.symmetric:
        denom = fact.eigvals + lam
        bad = np.abs(denom) <= 1e-14 * (1.0 + np.abs(fact.eigvals))
        if np.any(bad):
            raise SingularShift(f"eigenvalue shift singular at lambda={lam:.3e}")
        x = y / denom
    else:
        x = _solve_quasi_triangular(fact.u, lam, y)
    if counters is not None:
        counters.linear_solves += 1
    return fact.q @ x


def solve_dense(h_matrix: JacobianMatrix, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Direct O(d^3) reference solve of (H + lam*I) h = rhs."""
    h = np.asarray(h_matrix.entries, dtype=float)
    try:
        return np.linalg.solve(h + lam * np.eye(h.shape[0]), np.asarray(rhs, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise SingularShift(f"dense solve singular at lambda={lam:.3e}") from exc
