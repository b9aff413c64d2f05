# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled episode loop.

Mirrors ``olsucb._fallback.run_choices`` operation for operation; any change
to the arithmetic in ``policies.py`` must be repeated here.
"""
import numpy as np

from libc.math cimport log, sqrt
from libc.stdint cimport int64_t

cdef enum:
    OLS_UCB = 0
    ESCB2 = 1
    COMB_UCB1 = 2


cdef double _index(int kind, const int64_t[::1] arms, int64_t[::1] pulls,
                   int64_t[:, ::1] pair, double[::1] sums,
                   const double[:, ::1] g, const double[::1] diag, double lam,
                   double f_t, long t) nogil:
    cdef Py_ssize_t a, b, i, j, m = arms.shape[0]
    cdef double s_lam = 0.0, s_pair = 0.0, s = 0.0, width, lt, mean = 0.0
    if kind == OLS_UCB:
        for a in range(m):
            i = arms[a]
            s_lam += g[i, i] / pulls[i]
        for a in range(m):
            i = arms[a]
            for b in range(m):
                j = arms[b]
                s_pair += (<double>pair[i, j]) * g[i, j] / (<double>(pulls[i] * pulls[j]))
        width = sqrt(2.0 * f_t * (lam * s_lam + s_pair))
    elif kind == ESCB2:
        for a in range(m):
            i = arms[a]
            s += diag[i] / pulls[i]
        width = sqrt(2.0 * f_t * s)
    else:
        lt = log(<double>t) if t > 1 else 0.0
        for a in range(m):
            i = arms[a]
            s += 1.0 / sqrt(<double>pulls[i])
        width = sqrt(1.5 * lt) * s
    for a in range(m):
        i = arms[a]
        mean += sums[i] / pulls[i]
    return mean + width


def run_choices(const int64_t[:, ::1] act_idx, const double[:, ::1] rewards,
                const double[:, ::1] gamma, const double[::1] diag, double lam, int kind,
                const double[::1] ftab, const int64_t[::1] cover):
    """Play ``rewards.shape[0]`` stages and return the chosen action indices."""
    cdef Py_ssize_t T = rewards.shape[0], d = rewards.shape[1]
    cdef Py_ssize_t K = act_idx.shape[0], m = act_idx.shape[1]
    cdef Py_ssize_t n_cover = cover.shape[0]
    cdef Py_ssize_t t, k, a, b, i, j, best_k
    cdef double v, best
    pulls_np = np.zeros(d, dtype=np.int64)
    pair_np = np.zeros((d, d), dtype=np.int64)
    sums_np = np.zeros(d, dtype=np.float64)
    chosen_np = np.empty(T, dtype=np.int64)
    cdef int64_t[::1] pulls = pulls_np
    cdef int64_t[:, ::1] pair = pair_np
    cdef double[::1] sums = sums_np
    cdef int64_t[::1] chosen = chosen_np
    with nogil:
        for t in range(1, T + 1):
            if t <= n_cover:
                best_k = cover[t - 1]
            else:
                best_k = -1
                best = 0.0
                for k in range(K):
                    v = _index(kind, act_idx[k], pulls, pair, sums, gamma, diag,
                               lam, ftab[t], t)
                    if best_k < 0 or v > best:
                        best_k = k
                        best = v
            chosen[t - 1] = best_k
            for a in range(m):
                i = act_idx[best_k, a]
                pulls[i] += 1
                sums[i] += rewards[t - 1, i]
                for b in range(m):
                    j = act_idx[best_k, b]
                    pair[i, j] += 1
    return chosen_np
