# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors ``_core_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, fabs

cnp.import_array()


def ba_solve(const double[::1] p, const double[:, ::1] A, const double[:, ::1] d,
             const double[::1] q0, long max_iter, double tol):
    """Blahut-Arimoto fixed point for kernel ``A`` (``exp(-beta*d)`` or a 0/1 mask).

    Returns (cond, q, rate_bits, distortion, iterations, converged).
    """
    cdef Py_ssize_t nx = A.shape[0], nz = A.shape[1]
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef double s, c, rate = 0.0, prev = -1.0, dist = 0.0
    cdef bint converged = False

    cond_arr = np.empty((nx, nz), dtype=np.float64)
    q_arr = np.array(q0, dtype=np.float64, copy=True)
    qn_arr = np.empty(nz, dtype=np.float64)
    cdef double[:, ::1] cond = cond_arr
    cdef double[::1] q = q_arr
    cdef double[::1] qn = qn_arr

    while it < max_iter:
        it += 1
        for j in range(nz):
            qn[j] = 0.0
        for i in range(nx):
            s = 0.0
            for j in range(nz):
                c = q[j] * A[i, j]
                cond[i, j] = c
                s += c
            if s > 0.0:
                for j in range(nz):
                    cond[i, j] /= s
            for j in range(nz):
                qn[j] += p[i] * cond[i, j]
        rate = 0.0
        dist = 0.0
        for i in range(nx):
            if p[i] <= 0.0:
                continue
            for j in range(nz):
                c = cond[i, j]
                if c > 0.0 and qn[j] > 0.0:
                    rate += p[i] * c * log2(c / qn[j])
                dist += p[i] * c * d[i, j]
        for j in range(nz):
            q[j] = qn[j]
        if fabs(rate - prev) < tol:
            converged = True
            break
        prev = rate
    if rate < 0.0:
        rate = 0.0
    return cond_arr, q_arr, rate, dist, it, converged


def pairwise_sum(const cnp.uint8_t[:, ::1] a, const cnp.uint8_t[:, ::1] b, const double[:, ::1] table):
    """out[r, c] = sum_i table[a[r, i], b[c, i]]."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], n = a.shape[1]
    cdef Py_ssize_t r, c, i
    cdef double s
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for r in range(na):
        for c in range(nb):
            s = 0.0
            for i in range(n):
                s += table[a[r, i], b[c, i]]
            out[r, c] = s
    return out_arr


def cover_matrix(const cnp.uint8_t[:, ::1] a, const cnp.uint8_t[:, ::1] b,
                 const double[:, ::1] table, double threshold):
    """out[r, c] = 1 iff sum_i table[a[r, i], b[c, i]] <= threshold (early exit)."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], n = a.shape[1]
    cdef Py_ssize_t r, c, i
    cdef double s
    cdef cnp.uint8_t ok
    out_arr = np.zeros((na, nb), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    for r in range(na):
        for c in range(nb):
            s = 0.0
            ok = 1
            for i in range(n):
                s += table[a[r, i], b[c, i]]
                if s > threshold:
                    ok = 0
                    break
            out[r, c] = ok
    return out_arr


def greedy_max_cover(const cnp.uint8_t[:, ::1] cover, const double[::1] weights, long budget):
    """Greedy weighted max-coverage with lazy gain updates; ties -> smallest index.

    Returns (chosen indices, covered weight).
    """
    cdef Py_ssize_t ncand = cover.shape[0], nitems = cover.shape[1]
    cdef Py_ssize_t r, c, best
    cdef double g, bestg, total = 0.0, floor = 0.0
    cdef long picked = 0
    gain_arr = np.zeros(ncand, dtype=np.float64)
    uncovered_arr = np.ones(nitems, dtype=np.uint8)
    used_arr = np.zeros(ncand, dtype=np.uint8)
    cdef double[::1] gain = gain_arr
    cdef cnp.uint8_t[::1] uncovered = uncovered_arr
    cdef cnp.uint8_t[::1] used = used_arr
    chosen = []
    for r in range(ncand):
        g = 0.0
        for c in range(nitems):
            if cover[r, c]:
                g += weights[c]
        gain[r] = g
    for c in range(nitems):
        floor += weights[c]
    # residue left by repeated subtraction must not count as coverage
    floor *= 1e-12
    while picked < budget:
        bestg = floor
        for r in range(ncand):
            if not used[r] and gain[r] > bestg:
                bestg = gain[r]
        if not bestg > floor:
            break
        # gains within the floor of the maximum count as tied: take the smallest index
        best = -1
        for r in range(ncand):
            if not used[r] and gain[r] >= bestg - floor:
                best = r
                bestg = gain[r]
                break
        used[best] = 1
        chosen.append(best)
        picked += 1
        total += bestg
        for c in range(nitems):
            if cover[best, c] and uncovered[c]:
                uncovered[c] = 0
                for r in range(ncand):
                    if cover[r, c]:
                        gain[r] -= weights[c]
    return np.asarray(chosen, dtype=np.int64), total
