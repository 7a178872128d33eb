import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophoton.tridiag import (
    count_below,
    eigenvalue,
    eigenvalue_range,
    inverse_iteration,
    ql_eigenvalues,
    smallest_eigenvalues,
    tridiagonal_matvec,
)


def test_two_by_two():
    d = np.array([3.0, 2.0])
    e = np.array([np.sqrt(2.0)])
    assert smallest_eigenvalues(d, e, 2) == pytest.approx([1.0, 4.0], abs=1e-14)
    assert eigenvalue(d, e, 1) == pytest.approx(4.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=2**31))
def test_bisection_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n) * 10
    e = rng.normal(size=n - 1)
    k = min(n, 8)
    ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))[:k]
    scale = max(1.0, np.abs(ref).max())
    assert np.max(np.abs(smallest_eigenvalues(d, e, k) - ref)) < 1e-12 * scale
    assert np.max(np.abs(ql_eigenvalues(d, e, k) - ref)) < 1e-12 * scale


def test_range_and_counts():
    n = 30
    d = np.arange(n, dtype=float)
    e = np.full(n - 1, 0.3)
    ev = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    assert eigenvalue_range(d, e, 5, 9) == pytest.approx(ev[5:10], abs=1e-12)
    assert count_below(d, e, 10.0) == int(np.sum(ev < 10.0))


def test_inverse_iteration_null_vector():
    # rows sum to zero, so the all-ones vector is a null vector
    lower = np.array([1.0, 2.0, 1.0])
    upper = np.array([1.0, 1.0, 3.0])
    diag = np.array([-1.0, -2.0, -5.0, -1.0])
    v = inverse_iteration(lower, diag, upper, iterations=2)
    assert np.linalg.norm(tridiagonal_matvec(lower, diag, upper, v)) < 1e-12
    assert np.allclose(np.abs(v), 0.5)
