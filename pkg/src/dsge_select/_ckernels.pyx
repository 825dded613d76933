# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

import numpy as np
cimport cython


def simulate_lss(double[:, ::1] r, double[:, ::1] q, double[:, ::1] p, double[:, ::1] g,
                 double[::1] ks, double[::1] kj, double[:, ::1] eps, double[::1] s0):
    cdef Py_ssize_t steps = eps.shape[0], n_s = r.shape[0], n_j = p.shape[0], k = eps.shape[1]
    cdef Py_ssize_t t, i, l
    cdef double acc
    out_arr = np.empty((steps, n_s + n_j))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] s = np.array(s0, dtype=np.float64)
    cdef double[::1] s_next = np.empty(n_s)
    with nogil:
        for t in range(steps):
            for i in range(n_s):
                out[t, i] = s[i]
            for i in range(n_j):
                acc = kj[i]
                for l in range(n_s):
                    acc = acc + p[i, l] * s[l]
                for l in range(k):
                    acc = acc + g[i, l] * eps[t, l]
                out[t, n_s + i] = acc
            for i in range(n_s):
                acc = ks[i]
                for l in range(n_s):
                    acc = acc + r[i, l] * s[l]
                for l in range(k):
                    acc = acc + q[i, l] * eps[t, l]
                s_next[i] = acc
            for i in range(n_s):
                s[i] = s_next[i]
    return out_arr


def forward_affine(double[:, :, ::1] f, double[:, ::1] h, double[::1] s0):
    cdef Py_ssize_t steps = f.shape[0], n = f.shape[1], n_s = f.shape[2]
    cdef Py_ssize_t n_j = n - n_s
    cdef Py_ssize_t t, i, l
    cdef double acc
    out_arr = np.empty((steps, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] s = np.array(s0, dtype=np.float64)
    cdef double[::1] y = np.empty(n)
    with nogil:
        for t in range(steps):
            for i in range(n):
                acc = h[t, i]
                for l in range(n_s):
                    acc = acc + f[t, i, l] * s[l]
                y[i] = acc
            for i in range(n_s):
                out[t, i] = s[i]
            for i in range(n_j):
                out[t, n_s + i] = y[i]
            for i in range(n_s):
                s[i] = y[n_j + i]
    return out_arr
