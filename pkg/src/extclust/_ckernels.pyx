# Compiled versions of the hot numerical kernels.  Signatures and
# semantics match extclust._kernels_py exactly; the max/multiply kernels
# are bit-identical to the NumPy fallback (compiled with -ffp-contract=off
# so no FMA contraction changes the rounding of phi * y + z).

import numpy as np


def ar1_path(double[::1] z, double phi):
    cdef Py_ssize_t n = z.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t
    if n == 0:
        return out
    o[0] = z[0]
    for t in range(1, n):
        o[t] = phi * o[t - 1] + z[t]
    return out


def moving_max_path(double[::1] z, double[::1] c):
    cdef Py_ssize_t m = c.shape[0] - 1
    cdef Py_ssize_t n = z.shape[0] - m
    if n <= 0:
        raise ValueError("innovation array shorter than coefficient window")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t, j
    cdef double best, v
    for t in range(n):
        best = c[m] * z[t]
        for j in range(m):
            v = c[j] * z[t + m - j]
            if v > best:
                best = v
        o[t] = best
    return out


def block_maxima(double[::1] x, Py_ssize_t r):
    cdef Py_ssize_t k = x.shape[0] // r
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double best
    for i in range(k):
        best = x[i * r]
        for j in range(1, r):
            if x[i * r + j] > best:
                best = x[i * r + j]
        o[i] = best
    return out


def running_max(double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t
    cdef double best
    if n == 0:
        return out
    best = x[0]
    o[0] = best
    for t in range(1, n):
        if x[t] > best:
            best = x[t]
        o[t] = best
    return out


def frechet_distance(double[:, ::1] p, double[:, ::1] q):
    cdef Py_ssize_t np_ = p.shape[0]
    cdef Py_ssize_t nq = q.shape[0]
    if np_ == 0 or nq == 0:
        raise ValueError("empty polyline")
    prev_arr = np.empty(nq, dtype=np.float64)
    cur_arr = np.empty(nq, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, j
    cdef double dt, dx, d, m

    # first row: running max of pointwise distances
    for j in range(nq):
        dt = p[0, 0] - q[j, 0]
        if dt < 0:
            dt = -dt
        dx = p[0, 1] - q[j, 1]
        if dx < 0:
            dx = -dx
        d = dt if dt > dx else dx
        if j > 0 and prev[j - 1] > d:
            d = prev[j - 1]
        prev[j] = d

    for i in range(1, np_):
        for j in range(nq):
            dt = p[i, 0] - q[j, 0]
            if dt < 0:
                dt = -dt
            dx = p[i, 1] - q[j, 1]
            if dx < 0:
                dx = -dx
            d = dt if dt > dx else dx
            if j == 0:
                m = prev[0]
            else:
                m = prev[j]
                if prev[j - 1] < m:
                    m = prev[j - 1]
                if cur[j - 1] < m:
                    m = cur[j - 1]
            cur[j] = m if m > d else d
        tmp = prev
        prev = cur
        cur = tmp
    return float(prev[nq - 1])


def dcov_permutation_stats(double[:, ::1] a, double[:, ::1] b, long[:, ::1] perms):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t n_perm = perms.shape[0]
    out = np.empty(n_perm, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k, i, j
    cdef long pi
    cdef double acc
    for k in range(n_perm):
        acc = 0.0
        for i in range(n):
            pi = perms[k, i]
            for j in range(n):
                acc += a[i, j] * b[pi, perms[k, j]]
        o[k] = acc / (<double> n * <double> n)
    return out
