# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; drop-in twins of ``_pykernels`` (bit-identical results)."""

import numpy as np
cimport numpy as cnp
from libc.string cimport memcpy, memset

cnp.import_array()

ctypedef double f64


cdef inline void _tshift(f64* src, f64* dst, Py_ssize_t G, Py_ssize_t T,
                         Py_ssize_t C, Py_ssize_t P, Py_ssize_t i, bint reverse) nogil:
    cdef Py_ssize_t frame = C * P
    cdef Py_ssize_t band = i * P * sizeof(f64)
    cdef Py_ssize_t g, t, fwd, bwd
    # fwd: channel offset of the band carried from t-1, bwd: from t+1
    if reverse:
        fwd = i * P
        bwd = 0
    else:
        fwd = 0
        bwd = i * P
    for g in range(G):
        for t in range(T):
            memcpy(dst + (g * T + t) * frame + 2 * i * P,
                   src + (g * T + t) * frame + 2 * i * P,
                   (frame - 2 * i * P) * sizeof(f64))
            if t > 0:
                memcpy(dst + (g * T + t) * frame + fwd, src + (g * T + t - 1) * frame + fwd, band)
            else:
                memset(dst + (g * T + t) * frame + fwd, 0, band)
            if t < T - 1:
                memcpy(dst + (g * T + t) * frame + bwd, src + (g * T + t + 1) * frame + bwd, band)
            else:
                memset(dst + (g * T + t) * frame + bwd, 0, band)


def temporal_shift(x, Py_ssize_t i, bint reverse=False):
    cdef cnp.ndarray[f64, ndim=4, mode="c"] src = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=4, mode="c"] out = np.empty_like(src)
    cdef Py_ssize_t G = src.shape[0], T = src.shape[1], C = src.shape[2], P = src.shape[3]
    if out.size == 0:
        return out
    with nogil:
        _tshift(&src[0, 0, 0, 0], &out[0, 0, 0, 0], G, T, C, P, i, reverse)
    return out


def modality_rotate(x, Py_ssize_t k, Py_ssize_t step=1):
    cdef cnp.ndarray[f64, ndim=4, mode="c"] src = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=4, mode="c"] out = np.empty_like(src)
    cdef Py_ssize_t N = src.shape[0], F = src.shape[1], C = src.shape[2], P = src.shape[3]
    cdef Py_ssize_t p, q, f, frame = C * P, keep = (C - k) * P
    cdef f64* s
    cdef f64* d
    if out.size == 0:
        return out
    s = &src[0, 0, 0, 0]
    d = &out[0, 0, 0, 0]
    with nogil:
        for p in range(N):
            q = ((p + step) % N + N) % N
            for f in range(F):
                memcpy(d + (p * F + f) * frame, s + (p * F + f) * frame, keep * sizeof(f64))
                memcpy(d + (p * F + f) * frame + keep, s + (q * F + f) * frame + keep,
                       k * P * sizeof(f64))
    return out


def dual_shift(x, Py_ssize_t k, Py_ssize_t i, bint reverse=False):
    cdef cnp.ndarray[f64, ndim=5, mode="c"] src = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=5, mode="c"] out = np.empty_like(src)
    cdef Py_ssize_t N = src.shape[0], G = src.shape[1], T = src.shape[2]
    cdef Py_ssize_t C = src.shape[3], P = src.shape[4]
    cdef Py_ssize_t p, q, f, F = G * T, frame = C * P, keep = (C - k) * P
    cdef Py_ssize_t step = -1 if reverse else 1
    cdef f64* s
    cdef f64* d
    if out.size == 0:
        return out
    s = &src[0, 0, 0, 0, 0]
    d = &out[0, 0, 0, 0, 0]
    with nogil:
        _tshift(s, d, N * G, T, C, P, i, reverse)
        if k > 0 and N > 1:
            for p in range(N):
                q = ((p + step) % N + N) % N
                for f in range(F):
                    memcpy(d + (p * F + f) * frame + keep, s + (q * F + f) * frame + keep,
                           k * P * sizeof(f64))
    return out


def im2col(x, Py_ssize_t stride):
    cdef cnp.ndarray[f64, ndim=4, mode="c"] src = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = src.shape[0], C = src.shape[1], H = src.shape[2], W = src.shape[3]
    cdef Py_ssize_t Ho = (H - 1) // stride + 1, Wo = (W - 1) // stride + 1
    cdef cnp.ndarray[f64, ndim=2, mode="c"] cols = np.empty((n * Ho * Wo, C * 9))
    cdef f64[:, :, :, ::1] xv = src
    cdef f64[:, ::1] cv = cols
    cdef Py_ssize_t b, c, ky, kx, oy, ox, iy, ix, r
    cdef f64 v
    with nogil:
        for b in range(n):
            for oy in range(Ho):
                for ox in range(Wo):
                    r = (b * Ho + oy) * Wo + ox
                    for c in range(C):
                        for ky in range(3):
                            iy = oy * stride + ky - 1
                            for kx in range(3):
                                ix = ox * stride + kx - 1
                                if 0 <= iy < H and 0 <= ix < W:
                                    v = xv[b, c, iy, ix]
                                else:
                                    v = 0.0
                                cv[r, c * 9 + ky * 3 + kx] = v
    return cols


def col2im(cols, Py_ssize_t C, Py_ssize_t H, Py_ssize_t W, Py_ssize_t stride):
    cdef cnp.ndarray[f64, ndim=2, mode="c"] src = np.ascontiguousarray(cols, dtype=np.float64)
    cdef Py_ssize_t Ho = (H - 1) // stride + 1, Wo = (W - 1) // stride + 1
    cdef Py_ssize_t n = src.shape[0] // (Ho * Wo)
    cdef cnp.ndarray[f64, ndim=4, mode="c"] out = np.zeros((n, C, H, W))
    cdef f64[:, ::1] cv = src
    cdef f64[:, :, :, ::1] xv = out
    cdef Py_ssize_t b, c, ky, kx, oy, ox, iy, ix, r
    # tap-major accumulation order matches the numpy scatter-add exactly
    with nogil:
        for b in range(n):
            for ky in range(3):
                for kx in range(3):
                    for oy in range(Ho):
                        iy = oy * stride + ky - 1
                        if iy < 0 or iy >= H:
                            continue
                        for ox in range(Wo):
                            ix = ox * stride + kx - 1
                            if ix < 0 or ix >= W:
                                continue
                            r = (b * Ho + oy) * Wo + ox
                            for c in range(C):
                                xv[b, c, iy, ix] += cv[r, c * 9 + ky * 3 + kx]
    return out
