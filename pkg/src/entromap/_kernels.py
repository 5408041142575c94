"""Numba kernels for the pairwise softmin / softmax-barycenter reductions.

All kernels parallelize over output rows only; each row is reduced by a
single thread in a fixed sequential order, so results are bit-identical
for any thread count. Cost terms 0.5*||a - b||^2 are computed on the fly,
which keeps memory O(n + m) instead of O(n*m).
"""

import numpy as np
from numba import njit, prange

__all__ = ["softmin", "softmax_barycenter", "as_c_double"]


def as_c_double(a: np.ndarray) -> np.ndarray:
    """Return `a` as a C-contiguous float64 array (no copy when already so)."""
    return np.ascontiguousarray(a, dtype=np.float64)


@njit(parallel=True, fastmath=True, cache=True)
def _softmin_kernel(XA, XB, pot, eps, out):
    n = XA.shape[0]
    m = XB.shape[0]
    d = XA.shape[1]
    for i in prange(n):
        z = np.empty(m)
        zmax = -np.inf
        for j in range(m):
            c = 0.0
            for k in range(d):
                diff = XA[i, k] - XB[j, k]
                c += diff * diff
            v = (pot[j] - 0.5 * c) / eps
            z[j] = v
            if v > zmax:
                zmax = v
        s = 0.0
        for j in range(m):
            s += np.exp(z[j] - zmax)
        out[i] = -eps * (zmax + np.log(s / m))


@njit(parallel=True, fastmath=True, cache=True)
def _barycenter_kernel(Q, XB, pot, eps, out):
    nq = Q.shape[0]
    m = XB.shape[0]
    d = Q.shape[1]
    for i in prange(nq):
        z = np.empty(m)
        zmax = -np.inf
        for j in range(m):
            c = 0.0
            for k in range(d):
                diff = Q[i, k] - XB[j, k]
                c += diff * diff
            v = (pot[j] - 0.5 * c) / eps
            z[j] = v
            if v > zmax:
                zmax = v
        s = 0.0
        for j in range(m):
            w = np.exp(z[j] - zmax)
            z[j] = w
            s += w
        for k in range(d):
            acc = 0.0
            for j in range(m):
                acc += z[j] * XB[j, k]
            out[i, k] = acc / s


def softmin(points_a: np.ndarray, points_b: np.ndarray, pot: np.ndarray,
            eps: float) -> np.ndarray:
    """Row-wise soft minimum of the cost against a potential.

    Returns the vector with entries
    ``-eps * log((1/m) * sum_j exp((pot[j] - 0.5*||a_i - b_j||^2) / eps))``.
    """
    out = np.empty(points_a.shape[0])
    _softmin_kernel(as_c_double(points_a), as_c_double(points_b),
                    as_c_double(pot), float(eps), out)
    return out


def softmax_barycenter(queries: np.ndarray, points: np.ndarray,
                       pot: np.ndarray, eps: float) -> np.ndarray:
    """Softmax-weighted average of `points` for each query.

    Weight of point j at query q is proportional to
    ``exp((pot[j] - 0.5*||q - p_j||^2) / eps)``; weights are normalized to
    sum to one before averaging.
    """
    out = np.empty((queries.shape[0], points.shape[1]))
    _barycenter_kernel(as_c_double(queries), as_c_double(points),
                       as_c_double(pot), float(eps), out)
    return out
