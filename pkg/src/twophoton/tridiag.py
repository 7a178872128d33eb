"""Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

Matrices are passed as (diag, offdiag).  Only squared off-diagonals enter the
Sturm recurrence, so the kernels take ``e2 = offdiag**2``.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.linalg import eigh_tridiagonal, solve_banded

EPS = np.finfo(float).eps
MAX_BISECTIONS = 200


class EigensolverError(RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@njit(cache=True)
def _count_below(d, e2, x, pivmin):
    # number of eigenvalues strictly below x
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _gershgorin(d, e):
    n = d.shape[0]
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(e[i - 1])
        if i < n - 1:
            r += abs(e[i])
        lo = min(lo, d[i] - r)
        hi = max(hi, d[i] + r)
    return lo, hi


@njit(cache=True)
def _bisect_range(d, e, first, last, abstol, out, status):
    """Eigenvalues with indices first..last (ascending, 0-based) into out.

    status[j] is the bisection count, or -1 when the cap was hit.
    """
    e2 = e * e
    glo, ghi = _gershgorin(d, e)
    tnorm = max(abs(glo), abs(ghi))
    pivmin = max(1e-300, EPS * EPS * max(1.0, np.max(e2) if e2.shape[0] > 0 else 1.0))
    width = ghi - glo
    glo -= 2.0 * EPS * tnorm + 2.0 * pivmin
    ghi += 2.0 * EPS * tnorm + 2.0 * pivmin
    if width == 0.0:
        glo -= 1.0
        ghi += 1.0
    for j in range(first, last + 1):
        lo = glo
        hi = ghi
        # reuse the previous eigenvalue as a lower fence
        if j > first:
            lo = max(lo, out[j - first - 1] - 2.0 * (EPS * tnorm + abstol))
            if _count_below(d, e2, lo, pivmin) > j:
                lo = glo
        it = 0
        while True:
            tol = abstol + 2.0 * EPS * max(abs(lo), abs(hi))
            if hi - lo <= tol:
                break
            if it >= MAX_BISECTIONS:
                status[j - first] = -1
                break
            mid = 0.5 * (lo + hi)
            if _count_below(d, e2, mid, pivmin) > j:
                hi = mid
            else:
                lo = mid
            it += 1
        out[j - first] = 0.5 * (lo + hi)
        if status[j - first] != -1:
            status[j - first] = it


def smallest_eigenvalues(diag, offdiag, k, abstol=0.0):
    """The k smallest eigenvalues, ascending, each bracketed by bisection."""
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= dim = {n}, got k = {k}")
    return eigenvalue_range(d, e, 0, k - 1, abstol)


def eigenvalue_range(diag, offdiag, first, last, abstol=0.0):
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise EigensolverError("non-finite matrix entries")
    out = np.empty(last - first + 1)
    status = np.zeros(last - first + 1, dtype=np.int64)
    _bisect_range(d, e, first, last, abstol, out, status)
    bad = np.flatnonzero(status < 0)
    if bad.size:
        j = int(first + bad[0])
        raise EigensolverError(f"bisection cap reached for eigenvalue {j}", index=j)
    return out


def eigenvalue(diag, offdiag, index, abstol=0.0):
    return float(eigenvalue_range(diag, offdiag, index, index, abstol)[0])


def count_below(diag, offdiag, x):
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    e2 = e * e
    pivmin = max(1e-300, EPS * EPS * max(1.0, float(e2.max()) if e2.size else 1.0))
    return int(_count_below(d, e2, float(x), pivmin))


def ql_eigenvalues(diag, offdiag, k):
    """Fallback: LAPACK full-spectrum path restricted to the k smallest."""
    return eigh_tridiagonal(diag, offdiag, eigvals_only=True, select="i", select_range=(0, k - 1))


def tridiagonal_matvec(lower, diag, upper, v):
    out = np.asarray(diag) * v
    out[:-1] += np.asarray(upper) * v[1:]
    out[1:] += np.asarray(lower) * v[:-1]
    return out


def inverse_iteration(lower, diag, upper, iterations=2, seed=0, shift=0.0):
    """Approximate null vector of a general (non-symmetric) tridiagonal matrix.

    ``lower[j]`` sits at (j+1, j) and ``upper[j]`` at (j, j+1).  Each sweep
    solves (M - shift) y = v with partial pivoting; an exactly singular pivot
    is nudged by one ulp of the matrix scale.
    """
    diag = np.asarray(diag, dtype=float)
    n = diag.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    if n == 1:
        return np.ones(1)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag - shift
    ab[2, :-1] = lower
    scale = np.abs(ab).max()
    for _ in range(iterations):
        y = _nudged_solve(ab, v, scale)
        v = y / np.linalg.norm(y)
    return v


def _nudged_solve(ab, v, scale, tries=6):
    # a pivot that is exactly zero in floating point: shift by a growing multiple of one ulp
    nudge = EPS * scale
    for _ in range(tries):
        try:
            y = solve_banded((1, 1), ab, v)
            if np.all(np.isfinite(y)):
                return y
        except np.linalg.LinAlgError:
            pass
        ab[1, :] += nudge
        nudge *= 16
    raise EigensolverError("tridiagonal solve stayed singular after shifting")
