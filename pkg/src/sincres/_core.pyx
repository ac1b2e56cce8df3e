# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled convolution kernels (OpenMP + SIMD-friendly register tiling).

Every reduction is accumulated in a fixed order per output element, so
results are bit-identical regardless of the number of threads. The numpy
fallback in ``sincres.fallback`` implements the same contracts; parity is
enforced by tests.
"""

import numpy as np

cimport openmp
from cython.parallel cimport prange
from libc.string cimport memset


ctypedef fused real:
    float
    double

cdef extern from "_kernels.h":
    # register tile geometry for the 1d kernels
    const int SINCRES_KB
    const int SINCRES_NT
    void c1f_tile_f32(const float *x, const float *w, float *y,
                      Py_ssize_t C, Py_ssize_t N, Py_ssize_t No,
                      Py_ssize_t L, Py_ssize_t base) nogil
    void c1f_tile_f64(const double *x, const double *w, double *y,
                      Py_ssize_t C, Py_ssize_t N, Py_ssize_t No,
                      Py_ssize_t L, Py_ssize_t base) nogil
    void c1w_tile_f32(const float *x, const float *dy, float *dw,
                      Py_ssize_t B, Py_ssize_t C, Py_ssize_t N,
                      Py_ssize_t K, Py_ssize_t No, Py_ssize_t L,
                      Py_ssize_t nlo, Py_ssize_t nhi,
                      Py_ssize_t c, Py_ssize_t ts, Py_ssize_t pad) nogil
    void c1w_tile_f64(const double *x, const double *dy, double *dw,
                      Py_ssize_t B, Py_ssize_t C, Py_ssize_t N,
                      Py_ssize_t K, Py_ssize_t No, Py_ssize_t L,
                      Py_ssize_t nlo, Py_ssize_t nhi,
                      Py_ssize_t c, Py_ssize_t ts, Py_ssize_t pad) nogil

KB = SINCRES_KB
NT = SINCRES_NT


def set_num_threads(int n):
    if n < 1:
        n = 1
    openmp.omp_set_num_threads(n)


def get_max_threads():
    return openmp.omp_get_max_threads()


cdef inline Py_ssize_t imin(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a < b else b


cdef inline Py_ssize_t imax(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a > b else b


# ---------------------------------------------------------------------------
# 1d convolution (cross-correlation), stride 1, zero padding
#
#   y[b, k, n] = sum_{c, t} x[b, c, n - pad + t] * w[k, c, t]
# ---------------------------------------------------------------------------

cdef inline void _c1f_tile(const real *x, const real *w, real *y,
                           Py_ssize_t C, Py_ssize_t N, Py_ssize_t No,
                           Py_ssize_t L, Py_ssize_t base) nogil:
    if real is float:
        c1f_tile_f32(x, w, y, C, N, No, L, base)
    else:
        c1f_tile_f64(x, w, y, C, N, No, L, base)


cdef inline void _c1w_tile(const real *x, const real *dy, real *dw,
                           Py_ssize_t B, Py_ssize_t C, Py_ssize_t N,
                           Py_ssize_t K, Py_ssize_t No, Py_ssize_t L,
                           Py_ssize_t nlo, Py_ssize_t nhi,
                           Py_ssize_t c, Py_ssize_t ts, Py_ssize_t pad) nogil:
    if real is float:
        c1w_tile_f32(x, dy, dw, B, C, N, K, No, L, nlo, nhi, c, ts, pad)
    else:
        c1w_tile_f64(x, dy, dw, B, C, N, K, No, L, nlo, nhi, c, ts, pad)


def conv1d_fwd(real[:, :, ::1] x, real[:, :, ::1] w, Py_ssize_t pad):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], N = x.shape[2]
    cdef Py_ssize_t K = w.shape[0], L = w.shape[2]
    cdef Py_ssize_t No = N + 2 * pad - L + 1
    if No < 1:
        raise ValueError("conv1d: kernel longer than padded input")

    if real is float:
        y = np.zeros((B, K, No), dtype=np.float32)
    else:
        y = np.zeros((B, K, No), dtype=np.float64)
    cdef real[:, :, ::1] yv = y

    # interior outputs have every tap in range
    cdef Py_ssize_t nlo = imin(imax(pad, 0), No)
    cdef Py_ssize_t nhi = imax(imin(N + pad - L + 1, No), nlo)
    cdef Py_ssize_t ntiles = (nhi - nlo + SINCRES_NT - 1) // SINCRES_NT
    cdef Py_ssize_t kblocks = (K + SINCRES_KB - 1) // SINCRES_KB
    cdef Py_ssize_t ntasks = B * kblocks * ntiles

    cdef Py_ssize_t task, b, kb, it, k0, kcnt, ns, ncnt
    cdef Py_ssize_t c, t, n, kk, tlo, thi
    cdef real a

    for task in prange(ntasks, nogil=True, schedule='static'):
        b = task // (kblocks * ntiles)
        kb = (task // ntiles) % kblocks
        it = task % ntiles
        k0 = kb * SINCRES_KB
        kcnt = imin(SINCRES_KB, K - k0)
        ns = nlo + it * SINCRES_NT
        ncnt = imin(SINCRES_NT, nhi - ns)
        if kcnt == SINCRES_KB and ncnt == SINCRES_NT:
            _c1f_tile(&x[b, 0, 0], &w[k0, 0, 0], &yv[b, k0, ns],
                      C, N, No, L, ns - pad)
        else:
            for kk in range(kcnt):
                for n in range(ns, ns + ncnt):
                    a = 0
                    for c in range(C):
                        for t in range(L):
                            a = a + x[b, c, n - pad + t] * w[k0 + kk, c, t]
                    yv[b, k0 + kk, n] = a

    # boundary outputs: clip the tap range
    for task in prange(B * K, nogil=True, schedule='static'):
        b = task // K
        kk = task % K
        for n in range(nlo):
            tlo = pad - n
            thi = imin(L, N + pad - n)
            a = 0
            for c in range(C):
                for t in range(tlo, thi):
                    a = a + x[b, c, n - pad + t] * w[kk, c, t]
            yv[b, kk, n] = a
        for n in range(nhi, No):
            tlo = imax(pad - n, 0)
            thi = N + pad - n
            a = 0
            for c in range(C):
                for t in range(tlo, thi):
                    a = a + x[b, c, n - pad + t] * w[kk, c, t]
            yv[b, kk, n] = a

    return y


def conv1d_bwd_w(real[:, :, ::1] x, real[:, :, ::1] dy,
                 Py_ssize_t L, Py_ssize_t pad):
    """Gradient w.r.t. the kernels: dw[k,c,t] = sum_{b,n} dy[b,k,n] x[b,c,n-pad+t]."""
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], N = x.shape[2]
    cdef Py_ssize_t K = dy.shape[1], No = dy.shape[2]

    if real is float:
        dw = np.zeros((K, C, L), dtype=np.float32)
    else:
        dw = np.zeros((K, C, L), dtype=np.float64)
    cdef real[:, :, ::1] dwv = dw

    cdef Py_ssize_t nlo = imin(imax(pad, 0), No)
    cdef Py_ssize_t nhi = imax(imin(N + pad - L + 1, No), nlo)
    cdef Py_ssize_t ttiles = (L + NT - 1) // NT
    cdef Py_ssize_t kblocks = (K + KB - 1) // KB

    cdef Py_ssize_t task, kb, it, k0, kcnt, ts, tcnt
    cdef Py_ssize_t b, c, t, n, kk, tlo, thi
    cdef real g

    for task in prange(kblocks * C * ttiles, nogil=True, schedule='static'):
        kb = task // (C * ttiles)
        c = (task // ttiles) % C
        it = task % ttiles
        k0 = kb * KB
        kcnt = imin(KB, K - k0)
        ts = it * NT
        tcnt = imin(NT, L - ts)
        if kcnt == KB and tcnt == NT:
            _c1w_tile(&x[0, 0, 0], &dy[0, k0, 0], &dwv[k0, c, ts],
                      B, C, N, K, No, L, nlo, nhi, c, ts, pad)
        else:
            for kk in range(kcnt):
                for t in range(ts, ts + tcnt):
                    g = 0
                    for b in range(B):
                        for n in range(nlo, nhi):
                            g = g + dy[b, k0 + kk, n] * x[b, c, n - pad + t]
                    dwv[k0 + kk, c, t] = g

    # boundary output positions, tap range clipped
    for task in prange(K * C, nogil=True, schedule='static'):
        kk = task // C
        c = task % C
        for b in range(B):
            for n in range(nlo):
                g = dy[b, kk, n]
                tlo = pad - n
                thi = imin(L, N + pad - n)
                for t in range(tlo, thi):
                    dwv[kk, c, t] += g * x[b, c, n - pad + t]
            for n in range(nhi, No):
                g = dy[b, kk, n]
                tlo = imax(pad - n, 0)
                thi = N + pad - n
                for t in range(tlo, thi):
                    dwv[kk, c, t] += g * x[b, c, n - pad + t]

    return dw


def conv1d_bwd_x(real[:, :, ::1] w, real[:, :, ::1] dy,
                 Py_ssize_t N, Py_ssize_t pad):
    """Gradient w.r.t. the input: dx[b,c,j] = sum_{k,t} dy[b,k,j+pad-t] w[k,c,t]."""
    cdef Py_ssize_t K = w.shape[0], C = w.shape[1], L = w.shape[2]
    cdef Py_ssize_t B = dy.shape[0], No = dy.shape[2]

    if real is float:
        dx = np.zeros((B, C, N), dtype=np.float32)
    else:
        dx = np.zeros((B, C, N), dtype=np.float64)
    cdef real[:, :, ::1] dxv = dx

    cdef Py_ssize_t task, b, c, k, t, n, jlo, jhi
    cdef real wv

    for task in prange(B * C, nogil=True, schedule='static'):
        b = task // C
        c = task % C
        for k in range(K):
            for t in range(L):
                wv = w[k, c, t]
                # y position n contributes to x index n - pad + t
                jlo = imax(0, pad - t)
                jhi = imin(No, N + pad - t)
                for n in range(jlo, jhi):
                    dxv[b, c, n - pad + t] += wv * dy[b, k, n]

    return dx


# ---------------------------------------------------------------------------
# 2d convolution (cross-correlation) with stride and zero padding
#
#   y[b,k,i,j] = sum_{c,r,s} x[b, c, i*sh - ph + r, j*sw - pw + s] * w[k,c,r,s]
# ---------------------------------------------------------------------------

def conv2d_fwd(real[:, :, :, ::1] x, real[:, :, :, ::1] w,
               Py_ssize_t sh, Py_ssize_t sw, Py_ssize_t ph, Py_ssize_t pw):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t K = w.shape[0], R = w.shape[2], S = w.shape[3]
    cdef Py_ssize_t Ho = (H + 2 * ph - R) // sh + 1
    cdef Py_ssize_t Wo = (W + 2 * pw - S) // sw + 1
    if Ho < 1 or Wo < 1:
        raise ValueError("conv2d: kernel larger than padded input")

    if real is float:
        y = np.zeros((B, K, Ho, Wo), dtype=np.float32)
    else:
        y = np.zeros((B, K, Ho, Wo), dtype=np.float64)
    cdef real[:, :, :, ::1] yv = y

    cdef Py_ssize_t task, b, k, c, i, j, r, s, h, jlo, jhi
    cdef real wv
    cdef const real *xr
    cdef real *yr

    for task in prange(B * K, nogil=True, schedule='static'):
        b = task // K
        k = task % K
        for i in range(Ho):
            yr = &yv[b, k, i, 0]
            for c in range(C):
                for r in range(R):
                    h = i * sh - ph + r
                    if h < 0 or h >= H:
                        continue
                    xr = &x[b, c, h, 0]
                    for s in range(S):
                        wv = w[k, c, r, s]
                        # valid j: 0 <= j*sw - pw + s < W
                        jlo = imax(0, (pw - s + sw - 1) // sw)
                        jhi = imin(Wo, (W - 1 - s + pw) // sw + 1)
                        for j in range(jlo, jhi):
                            yr[j] += wv * xr[j * sw - pw + s]

    return y


def conv2d_bwd_w(real[:, :, :, ::1] x, real[:, :, :, ::1] dy,
                 Py_ssize_t R, Py_ssize_t S,
                 Py_ssize_t sh, Py_ssize_t sw, Py_ssize_t ph, Py_ssize_t pw):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t K = dy.shape[1], Ho = dy.shape[2], Wo = dy.shape[3]

    if real is float:
        dw = np.zeros((K, C, R, S), dtype=np.float32)
    else:
        dw = np.zeros((K, C, R, S), dtype=np.float64)
    cdef real[:, :, :, ::1] dwv = dw

    cdef Py_ssize_t k, c, r, s, b, i, j, h, jlo, jhi
    cdef real g
    cdef const real *xr
    cdef const real *gr

    for k in prange(K, nogil=True, schedule='static'):
        for c in range(C):
            for r in range(R):
                for s in range(S):
                    g = 0
                    for b in range(B):
                        for i in range(Ho):
                            h = i * sh - ph + r
                            if h < 0 or h >= H:
                                continue
                            xr = &x[b, c, h, 0]
                            gr = &dy[b, k, i, 0]
                            jlo = imax(0, (pw - s + sw - 1) // sw)
                            jhi = imin(Wo, (W - 1 - s + pw) // sw + 1)
                            for j in range(jlo, jhi):
                                g = g + gr[j] * xr[j * sw - pw + s]
                    dwv[k, c, r, s] = g

    return dw


def conv2d_bwd_x(real[:, :, :, ::1] w, real[:, :, :, ::1] dy,
                 Py_ssize_t H, Py_ssize_t W,
                 Py_ssize_t sh, Py_ssize_t sw, Py_ssize_t ph, Py_ssize_t pw):
    cdef Py_ssize_t K = w.shape[0], C = w.shape[1], R = w.shape[2], S = w.shape[3]
    cdef Py_ssize_t B = dy.shape[0], Ho = dy.shape[2], Wo = dy.shape[3]

    if real is float:
        dx = np.zeros((B, C, H, W), dtype=np.float32)
    else:
        dx = np.zeros((B, C, H, W), dtype=np.float64)
    cdef real[:, :, :, ::1] dxv = dx

    cdef Py_ssize_t task, b, c, k, i, j, r, s, h, jlo, jhi
    cdef real wv
    cdef real *xr
    cdef const real *gr

    for task in prange(B * C, nogil=True, schedule='static'):
        b = task // C
        c = task % C
        for k in range(K):
            for i in range(Ho):
                gr = &dy[b, k, i, 0]
                for r in range(R):
                    h = i * sh - ph + r
                    if h < 0 or h >= H:
                        continue
                    xr = &dxv[b, c, h, 0]
                    for s in range(S):
                        wv = w[k, c, r, s]
                        jlo = imax(0, (pw - s + sw - 1) // sw)
                        jhi = imin(Wo, (W - 1 - s + pw) // sw + 1)
                        for j in range(jlo, jhi):
                            xr[j * sw - pw + s] += wv * gr[j]

    return dx
