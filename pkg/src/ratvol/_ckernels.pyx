# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = 'cython'


def ar1_volatility_path(double x1, double a, w, u, coeffs):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t T = uv.shape[0]
    cdef Py_ssize_t nc = cv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(T)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(T)
    cdef Py_ssize_t t, j
    cdef double xt = x1, vol
    for t in range(T):
        if t > 0:
            xt = a * xt + wv[t - 1]
        x[t] = xt
        vol = cv[nc - 1]
        for j in range(nc - 2, -1, -1):
            vol = vol * xt + cv[j]
        y[t] = vol * uv[t]
    return x, y


def sample_acov(z, Py_ssize_t max_lag):
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t T = zv.shape[0]
    cdef Py_ssize_t k, t, top
    cdef double mean = 0.0, x
    for t in range(T):
        mean += zv[t]
    mean /= T
    cdef double[::1] zc = np.empty(T)
    for t in range(T):
        zc[t] = zv[t] - mean
    out = np.zeros(max_lag + 1)
    cdef double[::1] acc = out
    # one sweep over the data, all lags at once
    for t in range(T):
        x = zc[t]
        top = t if t < max_lag else max_lag
        for k in range(top + 1):
            acc[k] += x * zc[t - k]
    for k in range(max_lag + 1):
        acc[k] /= T
    return out


def absy_moment_vector(double a, double psi, double sigma, mw, v, double eu2,
                       double eabsu, Py_ssize_t lags):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mwv = np.ascontiguousarray(mw, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t d = vv.shape[0] - 1
    cdef Py_ssize_t n = d + 1
    cdef Py_ssize_t i, j, k, l
    cdef double acc, binom, al, sp, ev, ev2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vt = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mx = np.empty(2 * d + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.zeros((n, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w2 = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(lags + 2)
    sp = 1.0
    for j in range(n):
        vt[j] = vv[j] * sp
        sp *= sigma
    mx[0] = 1.0
    for k in range(1, 2 * d + 1):
        acc = 0.0
        binom = 1.0
        al = 1.0
        for l in range(k):
            acc += binom * al * mwv[k - l] * mx[l]
            binom = binom * (k - l) / (l + 1)
            al *= a
        mx[k] = acc / (1.0 - al)
    for i in range(n):
        binom = 1.0
        al = 1.0
        for l in range(i + 1):
            G[i, l] = binom * al * mwv[i - l]
            binom = binom * (i - l) / (l + 1)
            al *= a
        G[i, 0] -= mx[i]
    ev = 0.0
    ev2 = 0.0
    for i in range(n):
        ev += vt[i] * mx[i]
        acc = 0.0
        for j in range(n):
            acc += mx[i + j] * vt[j]
        w[i] = acc
        ev2 += vt[i] * acc
    out[0] = psi * ev * eabsu
    out[1] = psi * psi * (ev2 * eu2 - (ev * eabsu) * (ev * eabsu))
    for k in range(1, lags + 1):
        for i in range(n):
            acc = 0.0
            for j in range(i + 1):
                acc += G[i, j] * w[j]
            w2[i] = acc
        acc = 0.0
        for i in range(n):
            w[i] = w2[i]
            acc += vt[i] * w[i]
        out[k + 1] = psi * psi * acc * eabsu * eabsu
    return out
