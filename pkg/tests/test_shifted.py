"""Snapshot factorization and shifted-solve checks against dense references."""

import numpy as np
import pytest

from lazynewton import (
    JacobianMatrix,
    NumericalFailure,
    OracleCounters,
    SingularShift,
    factorize,
    solve_dense,
    solve_shifted,
)


def _random_monotone(rng, d, symmetric=False):
    a = rng.standard_normal((d, d))
    if symmetric:
        h = a @ a.T * 0.2
    else:
        h = a - a.T + 0.2 * a @ a.T
    return JacobianMatrix(entries=h, symmetric=symmetric)


class TestFactorize:
    def test_identity(self):
        fact = factorize(JacobianMatrix(entries=np.eye(3), symmetric=True))
        np.testing.assert_allclose(fact.q @ fact.u @ fact.q.T, np.eye(3), atol=1e-12)

    def test_diagonal_eigenvalues(self):
        fact = factorize(JacobianMatrix(entries=np.diag([1.0, 2.0, 3.0]), symmetric=True))
        np.testing.assert_allclose(np.sort(np.diag(fact.u)), [1.0, 2.0, 3.0], atol=1e-12)

    def test_reconstruction_and_structure(self):
        rng = np.random.default_rng(0)
        for symmetric in (False, True):
            jm = _random_monotone(rng, 50, symmetric)
            fact = factorize(jm)
            h = jm.entries
            norm = np.linalg.norm(h, np.inf)
            recon = np.linalg.norm(fact.q @ fact.u @ fact.q.T - h, np.inf)
            assert recon <= 1e-8 * (1.0 + norm)
            ortho = np.linalg.norm(fact.q.T @ fact.q - np.eye(50), np.inf)
            assert ortho <= 1e-10
            # strictly below the subdiagonal must be exactly zero
            below = np.tril(fact.u, k=-2)
            assert np.all(below == 0.0)
            sub = np.diag(fact.u, k=-1)
            for i, v in enumerate(sub):
                if v != 0.0:
                    # subdiagonal nonzeros mark 2x2 blocks, which cannot chain
                    assert i == 0 or sub[i - 1] == 0.0

    def test_counter_tick(self):
        c = OracleCounters()
        factorize(JacobianMatrix(entries=np.eye(2), symmetric=True), c)
        assert c.factorizations == 1

    def test_nonfinite_rejected(self):
        bad = np.eye(2)
        bad[0, 0] = np.nan
        with pytest.raises(NumericalFailure):
            factorize(JacobianMatrix(entries=bad, symmetric=False))

    def test_nonsquare_rejected(self):
        with pytest.raises(NumericalFailure):
            factorize(JacobianMatrix(entries=np.ones((2, 3)), symmetric=False))


class TestSolveShifted:
    def test_zero_matrix(self):
        fact = factorize(JacobianMatrix(entries=np.zeros((2, 2)), symmetric=True))
        np.testing.assert_allclose(
            solve_shifted(fact, 2.0, np.array([4.0, 6.0])), [2.0, 3.0]
        )

    def test_diagonal(self):
        fact = factorize(JacobianMatrix(entries=np.diag([1.0, 3.0]), symmetric=True))
        np.testing.assert_allclose(
            solve_shifted(fact, 1.0, np.array([2.0, 8.0])), [1.0, 2.0]
        )

    def test_matches_dense_on_random_cases(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            d = int(rng.integers(2, 51))
            jm = _random_monotone(rng, d, symmetric=bool(rng.integers(2)))
            fact = factorize(jm)
            lam = float(np.exp(rng.uniform(-3, 3)))
            rhs = rng.standard_normal(d)
            x = solve_shifted(fact, lam, rhs)
            ref = solve_dense(jm, lam, rhs)
            assert np.linalg.norm(x - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_residual_up_to_d200(self):
        rng = np.random.default_rng(2)
        for d in (10, 80, 200):
            jm = _random_monotone(rng, d)
            fact = factorize(jm)
            rhs = rng.standard_normal(d)
            for lam in (1e-3, 0.7, 50.0):
                x = solve_shifted(fact, lam, rhs)
                res = np.linalg.norm((jm.entries + lam * np.eye(d)) @ x - rhs)
                assert res <= 1e-10 * (np.linalg.norm(rhs) + 1.0)

    def test_positive_shift_always_succeeds_on_monotone(self):
        rng = np.random.default_rng(3)
        jm = _random_monotone(rng, 30)
        fact = factorize(jm)
        for lam in (1e-8, 1e-4, 1.0, 1e6):
            solve_shifted(fact, lam, rng.standard_normal(30))

    def test_no_refactorization_across_solves(self):
        rng = np.random.default_rng(4)
        jm = _random_monotone(rng, 20)
        c = OracleCounters()
        fact = factorize(jm, c)
        for _ in range(7):
            solve_shifted(fact, 0.5, rng.standard_normal(20), c)
        assert c.factorizations == 1
        assert c.linear_solves == 7

    def test_singular_shift_raises(self):
        fact = factorize(JacobianMatrix(entries=-np.eye(2), symmetric=True))
        with pytest.raises(SingularShift):
            solve_shifted(fact, 1.0, np.ones(2))

    def test_dimension_mismatch(self):
        fact = factorize(JacobianMatrix(entries=np.eye(2), symmetric=True))
        with pytest.raises(NumericalFailure):
            solve_shifted(fact, 1.0, np.ones(3))


class TestSolveDense:
    def test_identity_shift(self):
        jm = JacobianMatrix(entries=np.zeros((3, 3)), symmetric=True)
        r = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(solve_dense(jm, 1.0, r), r)

    def test_hand_rotation(self):
        jm = JacobianMatrix(entries=np.array([[0.0, 1.0], [-1.0, 0.0]]), symmetric=False)
        np.testing.assert_allclose(
            solve_dense(jm, 1.0, np.array([1.0, 0.0])), [0.5, 0.5]
        )

    def test_singular_raises(self):
        jm = JacobianMatrix(entries=-np.eye(2), symmetric=True)
        with pytest.raises(SingularShift):
            solve_dense(jm, 1.0, np.ones(2))
