"""End-to-end acceptance suite.

Each test prints one pass/fail line for its criterion.  Criterion 10 is a
reported trend, not a gate: its line carries the measured ratios.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from lazynewton import (
    JacobianMatrix,
    LenConfig,
    MsConfig,
    ProblemInstance,
    ProblemKind,
    RestartConfig,
    compute_reference,
    crn_step,
    factorize,
    fd_check,
    gen_synthetic_logistic,
    len_restart,
    len_run,
    make_affine_cubic,
    make_cubic_bilinear,
    make_fairness,
    make_hard_cubic,
    make_logistic,
    ms_solve,
    solve_dense,
    solve_shifted,
    with_protected_column,
)


# one line per criterion; the conftest terminal-summary hook prints these at
# the end of the run so they survive output capture
REPORT_LINES: list[str] = []


def _report(num, label, ok, extra=""):
    tail = f" ({extra})" if extra else ""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {label}{tail}"
    REPORT_LINES.append(line)
    print(line)
    assert ok, f"criterion {num} failed: {label}{tail}"


def _recorded(problem):
    calls = []
    base = problem.operator

    def wrapped(z):
        calls.append(z.copy())
        return base(z)

    return dataclasses.replace(problem, operator=wrapped), calls


def test_criterion_1_crn_defect():
    rng = np.random.default_rng(0)
    t0 = time.process_time()
    worst = 0.0
    for i in range(200):
        d = int(rng.integers(1, 21))
        a = rng.standard_normal((d, d))
        h = a - a.T + 0.3 * a @ a.T  # symmetric part PSD: monotone Jacobian
        f_val = rng.standard_normal(d) * float(np.exp(rng.uniform(-2, 3)))
        m_reg = float((0.1, 1.0, 10.0)[i % 3])
        fact = factorize(JacobianMatrix(entries=h, symmetric=False))
        res = crn_step(f_val, fact, m_reg)
        step = res.step
        defect = np.linalg.norm(
            f_val + h @ step + 0.5 * m_reg * np.linalg.norm(step) * step
        )
        worst = max(worst, defect / (1.0 + np.linalg.norm(f_val)))
    elapsed = time.process_time() - t0
    ok = worst <= 1e-8 and elapsed < 2.0
    _report(1, "regularized-step defect on 200 random monotone instances", ok,
            f"worst relative defect {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_shifted_solve_equivalence():
    rng = np.random.default_rng(1)
    worst_rel, worst_recon = 0.0, 0.0
    for _ in range(100):
        a = rng.standard_normal((50, 50))
        h = a - a.T + 0.2 * a @ a.T
        jm = JacobianMatrix(entries=h, symmetric=False)
        fact = factorize(jm)
        recon = np.linalg.norm(fact.q @ fact.u @ fact.q.T - h, np.inf)
        worst_recon = max(worst_recon, recon / (1.0 + np.linalg.norm(h, np.inf)))
        lam = float(np.exp(rng.uniform(-3, 3)))
        rhs = rng.standard_normal(50)
        x = solve_shifted(fact, lam, rhs)
        ref = solve_dense(jm, lam, rhs)
        worst_rel = max(worst_rel, np.linalg.norm(x - ref) / np.linalg.norm(ref))
    ok = worst_rel <= 1e-10 and worst_recon <= 1e-8
    _report(2, "factorized shifted solves match dense reference at d=50", ok,
            f"worst solve error {worst_rel:.2e}, reconstruction {worst_recon:.2e}")


def test_criterion_3_lazy_noop_on_affine():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((20, 20))
    b = a - a.T + 0.3 * a @ a.T
    c = rng.standard_normal(20)
    problem = ProblemInstance(
        dim=20, kind=ProblemKind.MNE,
        operator=lambda z: b @ z + c,
        jacobian=lambda z: b.copy(),
        lipschitz_L=1.0, strong_mu=0.0, name="affine",
    )
    outs = [
        len_run(problem, np.ones(20), LenConfig(max_steps=50, laziness=m, m_reg=4.0))
        for m in (1, 10)
    ]
    gap = float(np.max(np.abs(outs[0].z_last - outs[1].z_last)))
    ok = outs[0].steps == outs[1].steps == 50 and gap <= 1e-9
    _report(3, "constant Jacobian makes laziness an exact no-op", ok,
            f"max entrywise gap {gap:.2e} after 50 steps")


def test_criterion_4_counter_law():
    problem = make_cubic_bilinear(10, seed=0)
    lazy = len_run(problem, np.zeros(20), LenConfig(max_steps=100, laziness=10))
    eager = len_run(problem, np.zeros(20), LenConfig(max_steps=100, laziness=1))
    ok = (
        lazy.counters.jac_evals == lazy.counters.factorizations == 10
        and eager.counters.jac_evals == 100
    )
    hc = make_hard_cubic(6)
    for m in (1, 3):
        cfg = MsConfig(gamma=hc.lipschitz_L / m, laziness=m)
        _, k, _, _ = cfg.resolve(hc.lipschitz_L)
        res = ms_solve(hc, 2.0 * np.ones(6), cfg)
        ok = ok and res.jac_evals_used <= math.ceil(k / m) + 2
    _report(4, "Jacobian-oracle counts follow the laziness schedule", ok,
            f"lazy {lazy.counters.jac_evals}, eager {eager.counters.jac_evals}")


def test_criterion_5_boundedness_and_gap_displays():
    # bounded iterates on the minimax instance
    ok = True
    detail = []
    problem = make_cubic_bilinear(20, seed=0)
    z_star = problem.known_solution
    r0 = np.linalg.norm(z_star)
    for m in (1, 5):
        rec, calls = _recorded(problem)
        out = len_run(rec, np.zeros(40), LenConfig(max_steps=60, laziness=m))
        drift = max(
            np.linalg.norm(calls[2 * k] - z_star) for k in range(out.steps)
        )
        ok = ok and drift <= r0 + 1e-6
        detail.append(f"m={m} max dist {drift:.4f} vs R0 {r0:.4f}")
    # averaged-output gap bound on the minimization instance
    hc = make_hard_cubic(25)
    bare = dataclasses.replace(hc, reference_value=None)
    f_star = compute_reference(bare, budget=20_000)
    z_star = hc.known_solution
    r0 = np.linalg.norm(z_star)
    for t_budget in (16, 64, 256):
        cfg = LenConfig(max_steps=t_budget, laziness=1)
        out = len_run(hc, np.zeros(25), cfg)
        m_reg = cfg.resolve_m_reg(hc.lipschitz_L)
        gap = hc.value(out.z_out) - f_star
        bound = m_reg * r0 ** 3 / t_budget ** 1.5
        ok = ok and gap <= bound + 1e-8
        detail.append(f"T={t_budget} gap {gap:.3e} <= {bound:.3e}")
    _report(5, "boundedness and averaged-gap displays at desk scale", ok,
            "; ".join(detail))


def test_criterion_6_ms_oracle_certification():
    data = gen_synthetic_logistic(40, 5, seed=0)
    instances = [make_hard_cubic(5), make_logistic(data)]
    rng = np.random.default_rng(3)
    checked = 0
    ok = True
    while checked < 50:
        for problem in instances:
            for m in (1, 2, 5):
                if checked >= 50:
                    break
                cfg = MsConfig(gamma=problem.lipschitz_L / m, laziness=m)
                z_bar = rng.standard_normal(problem.dim)
                res = ms_solve(problem, z_bar, cfg)
                move = np.linalg.norm(res.z_ms - z_bar)
                ok = ok and res.verified
                ok = ok and move >= res.lam / cfg.gamma - 1e-12
                if res.lam > 0:
                    drift = np.linalg.norm(
                        res.z_ms - (z_bar - problem.operator(res.z_ms) / res.lam)
                    )
                    ok = ok and drift <= cfg.sigma * move + 1e-8
                checked += 1
    _report(6, "all 50 inner-solver calls return certified oracle pairs", ok,
            f"{checked} calls across 2 instances, m in {{1, 2, 5}}")


def test_criterion_7_restart_superlinearity():
    problem = make_affine_cubic(10, mu=1.0, seed=0)
    z0 = np.zeros(10)
    r0_sq = float(np.sum((z0 - problem.known_solution) ** 2))
    _, trace, _ = len_restart(
        problem, z0, RestartConfig(target_eps=1e-12, epochs=3, laziness=2)
    )
    dist = trace.metadata["epoch_dist_sq"]
    ok = len(dist) == 3
    detail = []
    for s, d in enumerate(dist, start=1):
        bound = 0.5 ** (1.5 ** (s - 1) + 1) * r0_sq * 1.001
        ok = ok and d <= bound
        detail.append(f"s={s}: {d:.2e} <= {bound:.2e}")
    _report(7, "restarted distances contract superlinearly", ok, "; ".join(detail))


def test_criterion_8_appendix_property_suites():
    ok = True
    # positive-sequence prefix bound, 1000 sequences
    rng = np.random.default_rng(4)
    for _ in range(1000):
        m = int(rng.integers(2, 13))
        r = np.exp(rng.uniform(-3, 3, m))
        prefix = np.cumsum(r)[:-1]
        ok = ok and float(np.sum(prefix ** 2)) <= 0.5 * m * m * float(np.sum(r ** 2)) * (1 + 1e-12)

    problem = make_hard_cubic(4)
    gamma = problem.lipschitz_L / 2.0
    lip_g = problem.lipschitz_L + 2.0 * gamma
    z_bar = np.zeros(4)

    def grad_g(z):
        w = z - z_bar
        return problem.operator(z) + gamma * np.linalg.norm(w) * w

    def hess_g(z):
        w = z - z_bar
        nw = np.linalg.norm(w)
        h = problem.jacobian(z)
        if nw > 0:
            h = h + gamma * (nw * np.eye(4) + np.outer(w, w) / nw)
        return h

    def val_g(z):
        return problem.value(z) + gamma / 3.0 * np.linalg.norm(z - z_bar) ** 3

    def descend(z):
        fact = factorize(JacobianMatrix(entries=hess_g(z), symmetric=True))
        return z + crn_step(grad_g(z), fact, lip_g).step

    # gradient dominance around the exact subproblem minimizer
    z_hat = z_bar.copy()
    for _ in range(200):
        if np.linalg.norm(grad_g(z_hat)) <= 1e-12:
            break
        z_hat = descend(z_hat)
    ok = ok and np.linalg.norm(grad_g(z_hat)) <= 1e-12
    for _ in range(100):
        z = z_hat + rng.standard_normal(4)
        ok = ok and np.linalg.norm(grad_g(z)) >= 0.5 * gamma * np.sum((z - z_hat) ** 2) - 1e-6

    # per-step descent inequality of the regularized step
    for _ in range(50):
        z = rng.standard_normal(4)
        z_plus = descend(z)
        lhs = np.linalg.norm(grad_g(z_plus)) ** 1.5 / (3.0 * math.sqrt(lip_g))
        ok = ok and lhs <= val_g(z) - val_g(z_plus) + 1e-8
    _report(8, "appendix inequality suites hold with zero violations", ok)


def test_criterion_9_fd_verification():
    data = gen_synthetic_logistic(40, 6, seed=3)
    fair_data = with_protected_column(gen_synthetic_logistic(40, 6, seed=4), 1)
    instances = [
        make_hard_cubic(6),
        make_cubic_bilinear(5, seed=1),
        make_logistic(data),
        make_fairness(fair_data),
    ]
    rng = np.random.default_rng(5)
    worst = 0.0
    for problem in instances:
        for _ in range(20):
            z = rng.standard_normal(problem.dim)
            grad_err, jac_err = fd_check(problem, z)
            worst = max(worst, jac_err)
            if problem.value is not None:
                worst = max(worst, grad_err)
    ok = worst <= 1e-5
    _report(9, "finite differences confirm every analytic oracle", ok,
            f"worst relative error {worst:.2e} over 80 points")


@pytest.mark.slow
def test_criterion_10_lazy_speedup_trend():
    problem = make_cubic_bilinear(500, seed=0)
    # common regularization across laziness levels so the comparison isolates
    # the snapshot reuse itself
    m_reg = 4.0 * problem.lipschitz_L
    stats = {}
    for m in (1, 10, 100):
        t0 = time.perf_counter()
        out = len_run(
            problem, np.zeros(1000),
            LenConfig(max_steps=1200, laziness=m, tolerance=1e-8, m_reg=m_reg),
        )
        stats[m] = {
            "steps": out.steps,
            "facts": out.counters.factorizations,
            "time": time.perf_counter() - t0,
            "norm": float(np.linalg.norm(problem.operator(out.z_last))),
        }
    reached = all(s["norm"] <= 1e-8 for s in stats.values())
    fact_ok = all(stats[m]["facts"] <= stats[1]["facts"] / 5 for m in (10, 100))
    step_ok = all(stats[m]["steps"] <= 3 * stats[1]["steps"] for m in (10, 100))
    detail = "; ".join(
        f"m={m}: {s['steps']} steps, {s['facts']} factorizations, {s['time']:.1f}s"
        for m, s in stats.items()
    )
    # soft criterion: the trend is reported, not gated; only the m=1 baseline
    # reaching the target is a hard sanity requirement
    line = (
        f"[{'PASS' if reached and fact_ok and step_ok else 'FAIL'}] "
        f"criterion 10 (reported, not gated): lazy speedup trend: {detail}; "
        f"all reached 1e-8: {reached}, "
        f"factorization ratio target {'met' if fact_ok else 'missed'}, "
        f"step ratio target {'met' if step_ok else 'missed'}, "
        f"wall-time ratios m=10 {stats[10]['time'] / stats[1]['time']:.2f}x, "
        f"m=100 {stats[100]['time'] / stats[1]['time']:.2f}x"
    )
    REPORT_LINES.append(line)
    print(line)
    assert stats[1]["norm"] <= 1e-8
