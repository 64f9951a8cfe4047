"""NumPy implementations of the hot numerical kernels.

These are the fallback backend used when the compiled extension
(``extclust._ckernels``) is unavailable.  Each function here must agree
with its compiled counterpart bit-for-bit for the pure max/multiply
kernels (``ar1_path``, ``moving_max_path``, ``block_maxima``,
``running_max``, ``frechet_distance``) and to floating-point roundoff
for the reduction kernel ``dcov_permutation_stats`` (different summation
orders).
"""

import numpy as np
from scipy.signal import lfilter


def ar1_path(z, phi):
    """Autoregressive recursion y[0] = z[0], y[t] = phi * y[t-1] + z[t].

    ``lfilter`` with a pure-AR transfer function performs exactly one
    multiply and one add per step, matching the compiled loop bit-for-bit.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    return lfilter([1.0], [1.0, -phi], z)


def moving_max_path(z, c):
    """Moving maximum out[t] = max_j c[j] * z[t + m - j], m = len(c) - 1."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    m = c.shape[0] - 1
    n = z.shape[0] - m
    if n <= 0:
        raise ValueError("innovation array shorter than coefficient window")
    out = c[m] * z[:n]
    for j in range(m - 1, -1, -1):
        np.maximum(out, c[j] * z[m - j : m - j + n], out=out)
    return out


def block_maxima(x, r):
    """Per-block maxima over disjoint blocks of length r; ragged tail dropped."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    k = x.shape[0] // r
    if k == 0:
        return np.empty(0, dtype=np.float64)
    return x[: k * r].reshape(k, r).max(axis=1)


def running_max(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return np.maximum.accumulate(x)


def frechet_distance(p, q):
    """Discrete Frechet distance between polylines p and q (max-metric).

    Both inputs are (n, 2) arrays of (time, value) points.  The coupling
    DP is the standard one: F[i, j] = max(d(i, j), min(F[i-1, j],
    F[i, j-1], F[i-1, j-1])) with a rolling row.  The inner j-scan is
    sequential because of the F[i, j-1] term.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    np_, nq = p.shape[0], q.shape[0]
    if np_ == 0 or nq == 0:
        raise ValueError("empty polyline")
    # d[i, j] row by row to bound memory at O(nq)
    qt, qx = q[:, 0], q[:, 1]
    d0 = np.maximum(np.abs(p[0, 0] - qt), np.abs(p[0, 1] - qx))
    prev = np.maximum.accumulate(d0)
    for i in range(1, np_):
        d = np.maximum(np.abs(p[i, 0] - qt), np.abs(p[i, 1] - qx))
        cur = np.empty_like(prev)
        best = prev[0]
        cur[0] = best if best > d[0] else d[0]
        for j in range(1, nq):
            m = prev[j]
            if prev[j - 1] < m:
                m = prev[j - 1]
            if cur[j - 1] < m:
                m = cur[j - 1]
            cur[j] = m if m > d[j] else d[j]
        prev = cur
    return float(prev[-1])


def dcov_permutation_stats(a, b, perms):
    """Squared distance covariance of a with row/column-permuted b.

    ``a`` and ``b`` are double-centered distance matrices; ``perms`` is an
    (n_perm, n) integer array of permutations.  Returns the n_perm vector
    of mean(a * b[perm][:, perm]) values.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty(perms.shape[0], dtype=np.float64)
    for k in range(perms.shape[0]):
        p = perms[k]
        out[k] = np.mean(a * b[np.ix_(p, p)])
    return out
