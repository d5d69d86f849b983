"""Problem abstraction and built-in test instances.

A problem bundles an operator oracle F, its Jacobian, and (when the
problem comes from minimization) a scalar value oracle.  For minimization
F is the gradient; for minimax problems over (x, y) it is the
concatenation [grad_x f; -grad_y f], so a root of F is a saddle point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import ConfigError, ContractViolation, NumericalFailure, ParseError, UnsupportedOperation
from .trace import OracleCounters

# max |third derivative| of log(1+exp(-t)), attained at t = +-log(2+sqrt(3))
_LOGISTIC_D3_MAX = 1.0 / (6.0 * np.sqrt(3.0))


class ProblemKind(enum.Enum):
    MNE = "mne"          # monotone nonlinear equation: find F(z*) = 0
    MINIMAX = "minimax"  # min_x max_y f(x, y)
    MIN = "min"          # min_x f(x)


@dataclass(frozen=True)
class JacobianMatrix:
    """Dense Jacobian with a symmetry flag (set for minimization problems)."""

    entries: np.ndarray
    symmetric: bool


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix with +-1 labels and an optional protected feature."""

    features: np.ndarray
    labels: np.ndarray
    protected: Optional[np.ndarray] = None

    def __post_init__(self):
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ConfigError("dataset must have n >= 1 samples and d >= 1 features")
        if self.labels.shape != (n,) or not np.all(np.abs(self.labels) == 1):
            raise ConfigError("labels must be an n-vector with entries in {-1,+1}")
        if self.protected is not None:
            if self.protected.shape != (n,) or not np.all(np.abs(self.protected) == 1):
                raise ConfigError("protected feature must be an n-vector in {-1,+1}")


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable evaluatable problem; oracle counters are owned by callers."""

    dim: int
    kind: ProblemKind
    operator: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    lipschitz_L: float
    strong_mu: float = 0.0
    value: Optional[Callable[[np.ndarray], float]] = None
    known_solution: Optional[np.ndarray] = None
    reference_value: Optional[float] = None
    minimax_split: Optional[int] = None  # x-block size for MINIMAX problems
    name: str = ""


def _check_point(problem: ProblemInstance, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (problem.dim,):
        raise ContractViolation(
            f"point has shape {z.shape}, expected ({problem.dim},) for problem {problem.name!r}"
        )
    return z


def eval_operator(
    problem: ProblemInstance, z: np.ndarray, counters: Optional[OracleCounters] = None
) -> np.ndarray:
    """Evaluate F(z) and charge one gradient-oracle call."""
    z = _check_point(problem, z)
    out = problem.operator(z)
    if counters is not None:
        counters.grad_evals += 1
    if not np.all(np.isfinite(out)):
        raise NumericalFailure(f"operator of {problem.name!r} returned non-finite entries")
    return out


def eval_jacobian(
    problem: ProblemInstance, z: np.ndarray, counters: Optional[OracleCounters] = None
) -> JacobianMatrix:
    """Evaluate the Jacobian of F at z and charge one Jacobian-oracle call."""
    z = _check_point(problem, z)
    entries = problem.jacobian(z)
    if counters is not None:
        counters.jac_evals += 1
    if not np.all(np.isfinite(entries)):
        raise NumericalFailure(f"Jacobian of {problem.name!r} returned non-finite entries")
    return JacobianMatrix(entries=entries, symmetric=problem.kind is ProblemKind.MIN)


def eval_value(problem: ProblemInstance, z: np.ndarray) -> float:
    """Evaluate the scalar objective (primal-dual value for minimax)."""
    if problem.value is None:
        raise UnsupportedOperation(f"problem {problem.name!r} has no value oracle")
    z = _check_point(problem, z)
    return float(problem.value(z))


# ---------------------------------------------------------------------------
# Built-in instances
# ---------------------------------------------------------------------------

def _bidiagonal(n: int) -> np.ndarray:
    """Unit upper-bidiagonal matrix with -1 on the superdiagonal."""
    a = np.eye(n)
    if n > 1:
        a += np.diag(-np.ones(n - 1), k=1)
    return a


def make_hard_cubic(n: int) -> ProblemInstance:
    """Worst-case cubic instance f(x) = (1/3) sum|u_i|^3 - x_1 with u = A x.

    The minimizer is available in closed form: u* = 1 entrywise, so
    x*_i = n + 1 - i by back substitution and f* = -2n/3.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    a = _bidiagonal(n)

    def value(x):
        u = a @ x
        return float(np.sum(np.abs(u) ** 3) / 3.0 - x[0])

    def grad(x):
        u = a @ x
        g = a.T @ (u * np.abs(u))
        g[0] -= 1.0
        return g

    def hess(x):
        u = a @ x
        return (a.T * (2.0 * np.abs(u))) @ a

    x_star = np.arange(n, 0, -1, dtype=float)
    return ProblemInstance(
        dim=n,
        kind=ProblemKind.MIN,
        operator=grad,
        jacobian=hess,
        value=value,
        lipschitz_L=2.0 ** 3.5,
        strong_mu=0.0,
        known_solution=x_star,
        reference_value=-2.0 * n / 3.0,
        name=f"hard-cubic(n={n})",
    )


def make_cubic_bilinear(n: int, seed: int = 0) -> ProblemInstance:
    """Cubic-regularized bilinear saddle problem of total dimension 2n.

    f(x, y) = (rho/6)||x||^3 + y^T (A x - b) with rho = 1/(20 n) and
    Rademacher b.  The saddle point solves A x* = b and
    y* = -(rho/2)||x*|| A^{-T} x*.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    rho = 1.0 / (20.0 * n)
    rng = np.random.default_rng(seed)
    b = rng.choice([-1.0, 1.0], size=n)
    a = _bidiagonal(n)

    def value(z):
        x, y = z[:n], z[n:]
        return float(rho / 6.0 * np.linalg.norm(x) ** 3 + y @ (a @ x - b))

    def op(z):
        x, y = z[:n], z[n:]
        fx = rho / 2.0 * np.linalg.norm(x) * x + a.T @ y
        fy = -(a @ x - b)
        return np.concatenate([fx, fy])

    def jac(z):
        x = z[:n]
        nx = np.linalg.norm(x)
        j = np.zeros((2 * n, 2 * n))
        if nx > 0:
            # Hessian of (rho/6)||x||^3; continuously extended by 0 at x = 0
            j[:n, :n] = rho / 2.0 * (nx * np.eye(n) + np.outer(x, x) / nx)
        j[:n, n:] = a.T
        j[n:, :n] = -a
        return j

    x_star = scipy.linalg.solve_triangular(a, b, lower=False)
    y_star = -(rho / 2.0) * np.linalg.norm(x_star) * scipy.linalg.solve_triangular(
        a.T, x_star, lower=True
    )
    return ProblemInstance(
        dim=2 * n,
        kind=ProblemKind.MINIMAX,
        operator=op,
        jacobian=jac,
        value=value,
        lipschitz_L=rho,
        strong_mu=0.0,
        known_solution=np.concatenate([x_star, y_star]),
        minimax_split=n,
        name=f"cubic-bilinear(n={n},seed={seed})",
    )


def _log1pexp(t):
    # log(1 + exp(-t)), overflow-safe
    return np.logaddexp(0.0, -t)


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-np.clip(t, -500.0, 500.0)))


def make_logistic(data: Dataset, reg: Optional[float] = None) -> ProblemInstance:
    """Regularized logistic regression; default reg = 1/n."""
    feats, labels = data.features, data.labels
    n, d = feats.shape
    if reg is None:
        reg = 1.0 / n
    if reg <= 0:
        raise ConfigError("reg must be positive")
    lipschitz = float(np.mean(np.linalg.norm(feats, axis=1) ** 3)) * _LOGISTIC_D3_MAX

    def value(x):
        t = labels * (feats @ x)
        return float(np.mean(_log1pexp(t)) + reg / 2.0 * x @ x)

    def grad(x):
        t = labels * (feats @ x)
        # d/dt log(1+exp(-t)) = -sigmoid(-t)
        w = -_sigmoid(-t) * labels
        return feats.T @ w / n + reg * x

    def hess(x):
        t = labels * (feats @ x)
        w = _sigmoid(t) * _sigmoid(-t)
        return (feats.T * w) @ feats / n + reg * np.eye(d)

    return ProblemInstance(
        dim=d,
        kind=ProblemKind.MIN,
        operator=grad,
        jacobian=hess,
        value=value,
        lipschitz_L=lipschitz,
        strong_mu=reg,
        name=f"logistic(n={n},d={d},reg={reg:g})",
    )


def make_fairness(
    data: Dataset, beta: float = 0.5, lam_x: float = 1e-4, lam_y: float = 1e-4
) -> ProblemInstance:
    """Fairness-aware logistic minimax over (x, y) with scalar adversary y.

    f(x, y) = (1/n) sum_i [l(b_i a_i'x) - beta * l(c_i y a_i'x)]
              + (lam_x/2)||x||^2 - (lam_y/2) y^2.
    """
    if data.protected is None:
        raise ConfigError("fairness problem requires a protected feature column")
    feats, labels, prot = data.features, data.labels, data.protected
    n, d = feats.shape
    # heuristic smoothness constant; the adversary couples y with a_i'x, so
    # no uniform bound exists -- this one is calibrated to unit-scale iterates
    lipschitz = (1.0 + beta) * float(np.mean((1.0 + np.linalg.norm(feats, axis=1)) ** 3)) * _LOGISTIC_D3_MAX

    def value(z):
        x, y = z[:d], z[d]
        ax = feats @ x
        main = np.mean(_log1pexp(labels * ax))
        adv = np.mean(_log1pexp(prot * y * ax))
        return float(main - beta * adv + lam_x / 2.0 * x @ x - lam_y / 2.0 * y * y)

    def op(z):
        x, y = z[:d], z[d]
        ax = feats @ x
        t = labels * ax
        s = prot * y * ax
        lp_t = -_sigmoid(-t)
        lp_s = -_sigmoid(-s)
        fx = feats.T @ (labels * lp_t - beta * prot * y * lp_s) / n + lam_x * x
        fy = beta * np.mean(prot * ax * lp_s) + lam_y * y
        return np.concatenate([fx, [fy]])

    def jac(z):
        x, y = z[:d], z[d]
        ax = feats @ x
        t = labels * ax
        s = prot * y * ax
        lp_s = -_sigmoid(-s)
        lpp_t = _sigmoid(t) * _sigmoid(-t)
        lpp_s = _sigmoid(s) * _sigmoid(-s)
        j = np.zeros((d + 1, d + 1))
        j[:d, :d] = (feats.T * (lpp_t - beta * y * y * lpp_s)) @ feats / n + lam_x * np.eye(d)
        dy_col = -beta * feats.T @ (prot * lp_s + y * ax * lpp_s) / n
        j[:d, d] = dy_col
        j[d, :d] = -dy_col  # F = [grad_x f; -grad_y f] makes the blocks skew
        j[d, d] = beta * np.mean(ax * ax * lpp_s) + lam_y
        return j

    return ProblemInstance(
        dim=d + 1,
        kind=ProblemKind.MINIMAX,
        operator=op,
        jacobian=jac,
        value=value,
        lipschitz_L=lipschitz,
        strong_mu=0.0,
        minimax_split=d,
        name=f"fairness(n={n},d={d},beta={beta:g})",
    )


def make_affine_cubic(
    n: int, mu: float = 1.0, rho: float = 0.5, seed: int = 0, skew_scale: float = 1.0
) -> ProblemInstance:
    """Strongly monotone affine-plus-cubic operator with a known root.

    F(z) = B z + c + rho ||z|| z where B = mu*I + skew (monotone with
    modulus mu) and c is chosen so that a random target z* is the root.
    """
    if mu <= 0:
        raise ConfigError("mu must be positive")
    rng = np.random.default_rng(seed)
    skew = rng.standard_normal((n, n)) * skew_scale
    skew = (skew - skew.T) / 2.0
    b_mat = mu * np.eye(n) + skew
    z_star = rng.standard_normal(n)
    c = -(b_mat @ z_star + rho * np.linalg.norm(z_star) * z_star)

    def op(z):
        return b_mat @ z + c + rho * np.linalg.norm(z) * z

    def jac(z):
        nz = np.linalg.norm(z)
        cubic = 0.0 if nz == 0 else rho * (nz * np.eye(n) + np.outer(z, z) / nz)
        return b_mat + cubic

    return ProblemInstance(
        dim=n,
        kind=ProblemKind.MNE,
        operator=op,
        jacobian=jac,
        lipschitz_L=2.0 * rho,
        strong_mu=mu,
        known_solution=z_star,
        name=f"affine-cubic(n={n},mu={mu:g},rho={rho:g},seed={seed})",
    )


def gen_synthetic_logistic(n: int, d: int, seed: int = 0) -> Dataset:
    """Gaussian features with labels from a planted unit-norm logistic model."""
    if n < 1 or d < 1:
        raise ConfigError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((n, d))
    x_true = rng.standard_normal(d)
    x_true /= np.linalg.norm(x_true)
    p_pos = 1.0 / (1.0 + np.exp(-feats @ x_true))
    labels = np.where(rng.random(n) < p_pos, 1.0, -1.0)
    return Dataset(features=feats, labels=labels)


def read_libsvm(path: str) -> Dataset:
    """Read a dense Dataset from a libsvm-format text file.

    Labels are mapped to {-1,+1}: any positive raw label becomes +1 and
    everything else (including 0) becomes -1.  Feature indices are 1-based.
    """
    rows: list[dict[int, float]] = []
    labels: list[float] = []
    max_idx = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                raw_label = float(tokens[0])
            except ValueError:
                raise ParseError(f"non-numeric label {tokens[0]!r}", lineno) from None
            entry: dict[int, float] = {}
            for tok in tokens[1:]:
                if ":" not in tok:
                    raise ParseError(f"expected index:value, got {tok!r}", lineno)
                idx_s, val_s = tok.split(":", 1)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"non-numeric token {tok!r}", lineno) from None
                if idx < 1:
                    raise ParseError(f"feature index must be >= 1, got {idx}", lineno)
                entry[idx] = val
                max_idx = max(max_idx, idx)
            labels.append(1.0 if raw_label > 0 else -1.0)
            rows.append(entry)
    if not rows:
        raise ParseError(f"no data lines in {path}")
    d = max(max_idx, 1)
    feats = np.zeros((len(rows), d))
    for i, entry in enumerate(rows):
        for idx, val in entry.items():
            feats[i, idx - 1] = val
    return Dataset(features=feats, labels=np.asarray(labels))


def with_protected_column(data: Dataset, column: int) -> Dataset:
    """Designate a (1-based) +-1 feature column as the protected attribute."""
    idx = column - 1
    if idx < 0 or idx >= data.features.shape[1]:
        raise ConfigError(f"protected column {column} out of range")
    col = data.features[:, idx]
    prot = np.where(col > 0, 1.0, -1.0)
    feats = np.delete(data.features, idx, axis=1)
    return Dataset(features=feats, labels=data.labels, protected=prot)


def fd_check(problem: ProblemInstance, z: np.ndarray, h: float = 1e-5):
    """Compare analytic oracles against central finite differences.

    Returns ``(grad_err, jac_err)`` as norms of the difference relative to
    1 + the analytic norm.  ``grad_err`` is NaN for MNE problems (no value
    oracle to differentiate).
    """
    if not 0.0 < h < 1.0:
        raise ContractViolation("h must lie in (0, 1)")
    z = _check_point(problem, z)
    d = problem.dim

    jac = problem.jacobian(z).copy()
    fd_jac = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fd_jac[:, i] = (problem.operator(z + e) - problem.operator(z - e)) / (2.0 * h)
    jac_err = np.linalg.norm(fd_jac - jac) / (1.0 + np.linalg.norm(jac))

    if problem.value is None:
        return float("nan"), float(jac_err)

    grad = problem.operator(z).copy()
    fd_grad = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fd_grad[i] = (problem.value(z + e) - problem.value(z - e)) / (2.0 * h)
    if problem.kind is ProblemKind.MINIMAX:
        # F stacks [grad_x f; -grad_y f]; flip the y-block of the FD gradient
        split = problem.minimax_split
        fd_grad[split:] = -fd_grad[split:]
    grad_err = np.linalg.norm(fd_grad - grad) / (1.0 + np.linalg.norm(grad))
    return float(grad_err), float(jac_err)
