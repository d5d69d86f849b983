"""Command-line front end: solve | bench | check."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness, problems
from .errors import ConfigError, ContractViolation, LazyNewtonError, NumericalFailure, ParseError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazynewton",
                                     description="Lazy second-order optimization benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one method on one problem, write a CSV trace")
    solve.add_argument("--problem", required=True)
    solve.add_argument("--method", required=True)
    solve.add_argument("--m", type=int, default=1, help="laziness (snapshot reuse length)")
    solve.add_argument("--steps", type=int, default=100)
    solve.add_argument("--M", type=float, default=None, dest="m_reg")
    solve.add_argument("--gamma", type=float, default=None)
    solve.add_argument("--eps", type=float, default=1e-6)
    solve.add_argument("--stepsize", type=float, default=0.1)
    solve.add_argument("--tolerance", type=float, default=0.0)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--data", default=None, help="libsvm dataset path")
    solve.add_argument("--protected-col", type=int, default=None)
    solve.add_argument("--n", type=int, default=None, help="problem size")
    solve.add_argument("--d", type=int, default=None, help="feature dimension")
    solve.add_argument("--out", required=True, help="CSV output path")

    bench = sub.add_parser("bench", help="run an experiment grid from a config file")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out-dir", required=True)

    sub.add_parser("check", help="finite-difference and invariant checks on built-ins")
    return parser


def _cmd_solve(args) -> int:
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.d is not None:
        params["d"] = args.d
    if args.data is not None:
        params["data"] = args.data
    if args.protected_col is not None:
        params["protected_col"] = args.protected_col
    problem = harness.build_problem(args.problem, seed=args.seed, **params)
    f_star = problem.reference_value
    if f_star is None and problem.value is not None and args.method in (
        "A-LEN", "Lazy-CRN", "A-NPE", "AGD"
    ):
        f_star = harness.compute_reference(problem)
    trace = harness.run_single(
        problem, args.method, steps=args.steps, tolerance=args.tolerance, m=args.m,
        stepsize=args.stepsize, m_reg=args.m_reg, gamma=args.gamma, eps=args.eps,
        f_star=f_star,
    )
    trace.metadata["seed"] = args.seed
    harness.write_csv(trace, args.out)
    print(f"wrote {len(trace.records)} records to {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = harness.load_config(args.config)
    traces = harness.run_experiment(config)
    os.makedirs(args.out_dir, exist_ok=True)
    by_key = sorted(
        traces,
        key=lambda tr: (str(tr.metadata.get("problem")), str(tr.metadata.get("method")),
                        str(tr.metadata.get("m", tr.metadata.get("stepsize", ""))),
                        str(tr.metadata.get("seed"))),
    )
    for i, trace in enumerate(by_key):
        method = str(trace.metadata.get("method", "run")).replace("/", "-")
        grid_val = trace.metadata.get("m", trace.metadata.get("stepsize", ""))
        name = f"{i:03d}_{method}_{grid_val}_seed{trace.metadata.get('seed', 0)}.csv"
        harness.write_csv(trace, os.path.join(args.out_dir, name))
    print(f"wrote {len(by_key)} trace files to {args.out_dir}")
    return EXIT_OK


def _cmd_check(args) -> int:
    rng = np.random.default_rng(0)
    instances = [
        problems.make_hard_cubic(8),
        problems.make_cubic_bilinear(6, seed=0),
        problems.make_logistic(problems.gen_synthetic_logistic(60, 8, seed=0)),
        problems.make_fairness(_toy_fairness_data()),
        problems.make_affine_cubic(8, mu=1.0, rho=0.5, seed=0),
    ]
    failed = False
    for problem in instances:
        worst_g, worst_j = 0.0, 0.0
        for _ in range(5):
            z = rng.standard_normal(problem.dim) * 0.5
            g_err, j_err = problems.fd_check(problem, z)
            if not np.isnan(g_err):
                worst_g = max(worst_g, g_err)
            worst_j = max(worst_j, j_err)
        mono_ok = _monotone_spot_check(problem, rng)
        ok = worst_j <= 1e-5 and (np.isnan(worst_g) or worst_g <= 1e-5) and mono_ok
        failed |= not ok
        status = "ok" if ok else "FAIL"
        print(f"{status:4} {problem.name}: grad_err={worst_g:.2e} jac_err={worst_j:.2e} "
              f"monotone={'yes' if mono_ok else 'NO'}")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def _toy_fairness_data():
    data = problems.gen_synthetic_logistic(40, 6, seed=1)
    rng = np.random.default_rng(2)
    prot = rng.choice([-1.0, 1.0], size=40)
    return problems.Dataset(features=data.features, labels=data.labels, protected=prot)


def _monotone_spot_check(problem, rng, pairs=20, scale=0.3) -> bool:
    for _ in range(pairs):
        z1 = rng.standard_normal(problem.dim) * scale
        z2 = rng.standard_normal(problem.dim) * scale
        lhs = (problems.eval_operator(problem, z1) - problems.eval_operator(problem, z2)) @ (z1 - z2)
        if lhs < problem.strong_mu * np.sum((z1 - z2) ** 2) - 1e-8:
            return False
    return True


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_check(args)
    except (ConfigError, ContractViolation, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, LazyNewtonError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
