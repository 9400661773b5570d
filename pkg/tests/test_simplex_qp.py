import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfnash.errors import InnerSolveError
from sfnash.simplex_qp import fw_gap, objective, solve_simplex_qp


def active_set_oracle(Q, b):
    """Best KKT point over every support subset (exhaustive)."""
    k = len(b)
    best = np.inf
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            S = list(S)
            A = np.zeros((size + 1, size + 1))
            A[:size, :size] = Q[np.ix_(S, S)]
            A[:size, size] = 1
            A[size, :size] = 1
            rhs = np.r_[-b[S], 1.0]
            sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
            if np.abs(A @ sol - rhs).max() > 1e-9 or sol[:size].min() < -1e-12:
                continue
            a = np.zeros(k)
            a[S] = np.clip(sol[:size], 0, None)
            a /= a.sum()
            best = min(best, objective(Q, b, a))
    return best


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_matches_active_set_enumeration(k, d, seed):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(k, d))
    Q = rng.uniform(0.1, 3) * Z @ Z.T
    b = rng.normal(size=k)
    alpha, gap, _ = solve_simplex_qp(Q, b)
    assert alpha.min() >= 0 and alpha.sum() == pytest.approx(1, abs=1e-12)
    assert gap <= 1e-9
    assert objective(Q, b, alpha) == pytest.approx(active_set_oracle(Q, b), abs=1e-9)


def test_vertex_solution_when_linear():
    alpha, gap, _ = solve_simplex_qp(np.zeros((3, 3)), np.array([2.0, -1.0, 0.5]))
    np.testing.assert_array_equal(alpha, [0, 1, 0])
    assert fw_gap(np.zeros((3, 3)), np.array([2.0, -1.0, 0.5]), alpha) == 0


def test_iteration_cap_reports_gap():
    rng = np.random.default_rng(3)
    Z = rng.normal(size=(40, 2))
    with pytest.raises(InnerSolveError) as info:
        solve_simplex_qp(Z @ Z.T, rng.normal(size=40), tol=0.0, max_iter=2, polish_every=10 ** 6)
    assert info.value.gap > 0
