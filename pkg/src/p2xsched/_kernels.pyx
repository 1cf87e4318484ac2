# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the numeric kernels in ``_kernels_py``."""
import numpy as np
from libc.math cimport isnan, NAN


def centered_moving_average(x, Py_ssize_t m):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.full(n, np.nan)
    cdef double[::1] ov = out
    cdef Py_ssize_t h, t, j
    cdef double acc
    if m % 2 == 0:
        h = m // 2
        for t in range(h, n - h):
            acc = 0.5 * xv[t - h] + 0.5 * xv[t + h]
            for j in range(t - h + 1, t + h):
                acc += xv[j]
            ov[t] = acc / m
    else:
        h = (m - 1) // 2
        for t in range(h, n - h):
            acc = 0.0
            for j in range(t - h, t + h + 1):
                acc += xv[j]
            ov[t] = acc / m
    return out


def seasonal_profile(detrended, Py_ssize_t m, Py_ssize_t phase):
    cdef const double[::1] d = np.ascontiguousarray(detrended, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], i, k
    sums = np.zeros(m)
    counts = np.zeros(m, dtype=np.int64)
    cdef double[::1] sv = sums
    cdef long long[::1] cv = counts
    for i in range(n):
        if not isnan(d[i]):
            k = (i + phase) % m
            sv[k] += d[i]
            cv[k] += 1
    out = np.empty(m)
    cdef double[::1] ov = out
    for k in range(m):
        ov[k] = sv[k] / cv[k] if cv[k] > 0 else NAN
    return out


def lag_matrix(z, Py_ssize_t p):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0], r, j
    X = np.empty((n - p, p + 1))
    cdef double[:, ::1] Xv = X
    for r in range(n - p):
        Xv[r, 0] = 1.0
        for j in range(1, p + 1):
            Xv[r, j] = zv[r + p - j]
    return X


def ar_predict(coef, double intercept, history, Py_ssize_t horizon):
    cdef const double[::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t p = cv.shape[0], h, j
    hist = np.ascontiguousarray(history, dtype=np.float64)
    buf = np.empty(p + horizon)
    cdef double[::1] bv = buf
    cdef const double[::1] hv = hist
    cdef Py_ssize_t nh = hv.shape[0]
    for j in range(p):
        bv[j] = hv[nh - p + j]
    cdef double acc
    for h in range(horizon):
        acc = intercept
        for j in range(p):
            acc += cv[j] * bv[p + h - 1 - j]
        bv[p + h] = acc
    return buf[p:].copy()
