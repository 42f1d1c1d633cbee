import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from spherepinch.sturm import (
    BisectionError,
    bisect_eigenvalues,
    eigh_smallest,
    gershgorin_bounds,
    inverse_iteration,
    sturm_count,
)


def laplacian_1d(n):
    return np.full(n, 2.0), np.full(n - 1, -1.0)


def test_dirichlet_laplacian_closed_form():
    n = 200
    d, e = laplacian_1d(n)
    vals = bisect_eigenvalues(d, e, 10, tol=1e-12)
    j = np.arange(1, 11)
    exact = 2 - 2 * np.cos(j * np.pi / (n + 1))
    assert np.max(np.abs(vals - exact)) < 1e-11


def test_sturm_count_brackets():
    d, e = laplacian_1d(50)
    lo, hi = gershgorin_bounds(d, e)
    assert sturm_count(d, e, lo - 1) == 0
    assert sturm_count(d, e, hi + 1) == 50


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_matches_reference_solver(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    ref = eigh_tridiagonal(d, e, eigvals_only=True)
    count = max(1, n // 2)
    vals = bisect_eigenvalues(d, e, count, tol=1e-11)
    assert np.max(np.abs(vals - ref[:count])) < 1e-9


def test_eigenvectors_satisfy_equation():
    rng = np.random.default_rng(7)
    d = rng.uniform(1, 3, 60)
    e = rng.uniform(-1, 1, 59)
    vals, vecs = eigh_smallest(d, e, 5)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    for lam, v in zip(vals, vecs.T):
        assert np.linalg.norm(T @ v - lam * v) < 1e-8
        assert np.isclose(np.linalg.norm(v), 1.0)
        assert v[np.argmax(np.abs(v))] > 0


def test_inverse_iteration_is_deterministic():
    d, e = laplacian_1d(30)
    lam = bisect_eigenvalues(d, e, 1)[0]
    assert np.array_equal(inverse_iteration(d, e, lam), inverse_iteration(d, e, lam))


def test_non_convergence_reported():
    d, e = laplacian_1d(20)
    with pytest.raises(BisectionError, match="did not converge"):
        bisect_eigenvalues(d, e, 2, tol=1e-30, max_iter=5)


def test_count_guards():
    d, e = laplacian_1d(5)
    assert bisect_eigenvalues(d, e, 0).size == 0
    with pytest.raises(ValueError):
        bisect_eigenvalues(d, e, 6)
