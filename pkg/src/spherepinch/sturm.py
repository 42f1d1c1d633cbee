"""Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

Eigenvalues come from bisection on the Sturm count (number of eigenvalues
below a shift, read off the LDL^T pivots); eigenvectors from inverse
iteration at the converged eigenvalue. Everything is deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

__all__ = ["BisectionError", "sturm_count", "gershgorin_bounds", "bisect_eigenvalues", "inverse_iteration", "eigh_smallest"]

MAX_BISECTION_ITER = 200


class BisectionError(RuntimeError):
    pass


@njit(cache=True)
def _sturm_count(d, e2, x):
    n = d.shape[0]
    count = 0
    q = d[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - e2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def sturm_count(d, e, x: float) -> int:
    """Number of eigenvalues strictly below ``x`` (diag ``d``, off-diag ``e``)."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    return int(_sturm_count(d, e * e, float(x)))


def gershgorin_bounds(d, e) -> tuple[float, float]:
    d = np.asarray(d, dtype=float)
    rad = np.zeros_like(d)
    rad[:-1] += np.abs(e)
    rad[1:] += np.abs(e)
    return float(np.min(d - rad)), float(np.max(d + rad))


@njit(cache=True)
def _bisect(d, e2, count, lo0, hi0, tol, max_iter):
    out = np.empty(count)
    iters = np.zeros(count, dtype=np.int64)
    lo_prev = lo0
    for j in range(count):
        lo, hi = lo_prev, hi0
        it = 0
        while hi - lo > tol and it < max_iter:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if _sturm_count(d, e2, mid) <= j:
                lo = mid
            else:
                hi = mid
            it += 1
        out[j] = 0.5 * (lo + hi)
        iters[j] = it
        lo_prev = lo
    return out, iters


def bisect_eigenvalues(d, e, count: int, tol: float = 1e-10, max_iter: int = MAX_BISECTION_ITER) -> np.ndarray:
    """The ``count`` smallest eigenvalues, each to absolute tolerance ``tol``."""
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    if count <= 0:
        return np.empty(0)
    if count > d.size:
        raise ValueError("count exceeds matrix size")
    lo, hi = gershgorin_bounds(d, e)
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    vals, iters = _bisect(d, e * e, int(count), lo - pad, hi + pad, float(tol), int(max_iter))
    if np.any(iters >= max_iter):
        j = int(np.argmax(iters >= max_iter))
        raise BisectionError(
            f"bisection for eigenvalue #{j} did not converge in {max_iter} iterations "
            f"(interval [{lo:.6g}, {hi:.6g}], tol {tol:g})"
        )
    return vals


def inverse_iteration(d, e, lam: float, steps: int = 3) -> np.ndarray:
    """Unit eigenvector for eigenvalue ``lam`` by shifted inverse iteration."""
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = d.size
    scale = max(1.0, float(np.max(np.abs(d))))
    shift = lam + 64 * np.finfo(float).eps * scale
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d - shift
    ab[2, :-1] = e
    x = np.full(n, 1.0 / np.sqrt(n))
    # deterministic, non-symmetric start so no eigenvector is orthogonal to it
    x += np.linspace(0.0, 1.0 / np.sqrt(n), n)
    for _ in range(steps):
        x = solve_banded((1, 1), ab, x)
        x /= np.linalg.norm(x)
    i = int(np.argmax(np.abs(x)))
    return x if x[i] > 0 else -x


def eigh_smallest(d, e, count: int, tol: float = 1e-10):
    vals = bisect_eigenvalues(d, e, count, tol)
    vecs = np.column_stack([inverse_iteration(d, e, v) for v in vals]) if count else np.empty((len(d), 0))
    return vals, vecs
