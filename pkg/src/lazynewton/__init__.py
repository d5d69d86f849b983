"""Second-order extragradient methods with lazy Hessian updates."""

from .alen import AccelOutput, MsConfig, MsResult, alen_run, anpe_run, lazy_crn_run, ms_solve
from .baselines import FirstOrderConfig, agd_run, eg_run
from .crn import CrnResult, crn_step
from .errors import (
    ConfigError,
    ContractViolation,
    Divergence,
    LazyNewtonError,
    NonConvergence,
    NumericalFailure,
    ParseError,
    SingularShift,
    UnsupportedOperation,
)
from .harness import (
    ExperimentConfig,
    build_problem,
    compute_reference,
    load_config,
    read_csv,
    run_experiment,
    run_single,
    write_csv,
)
from .len_solver import LenConfig, LenOutput, len_run, npe_run
from .problems import (
    Dataset,
    JacobianMatrix,
    ProblemInstance,
    ProblemKind,
    eval_jacobian,
    eval_operator,
    eval_value,
    fd_check,
    gen_synthetic_logistic,
    make_affine_cubic,
    make_cubic_bilinear,
    make_fairness,
    make_hard_cubic,
    make_logistic,
    read_libsvm,
    with_protected_column,
)
from .restart import RestartConfig, alen_restart, len_restart
from .shifted import SnapshotFactorization, factorize, solve_dense, solve_shifted
from .trace import OracleCounters, RunTrace

__all__ = [
    "AccelOutput", "MsConfig", "MsResult", "alen_run", "anpe_run", "lazy_crn_run", "ms_solve",
    "FirstOrderConfig", "agd_run", "eg_run",
    "CrnResult", "crn_step",
    "ConfigError", "ContractViolation", "Divergence", "LazyNewtonError", "NonConvergence",
    "NumericalFailure", "ParseError", "SingularShift", "UnsupportedOperation",
    "ExperimentConfig", "build_problem", "compute_reference", "load_config", "read_csv",
    "run_experiment", "run_single", "write_csv",
    "LenConfig", "LenOutput", "len_run", "npe_run",
    "Dataset", "JacobianMatrix", "ProblemInstance", "ProblemKind",
    "eval_jacobian", "eval_operator", "eval_value", "fd_check",
    "gen_synthetic_logistic", "make_affine_cubic", "make_cubic_bilinear", "make_fairness",
    "make_hard_cubic", "make_logistic", "read_libsvm", "with_protected_column",
    "RestartConfig", "alen_restart", "len_restart",
    "SnapshotFactorization", "factorize", "solve_dense", "solve_shifted",
    "OracleCounters", "RunTrace",
]
