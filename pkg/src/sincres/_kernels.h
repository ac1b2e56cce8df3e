/* Hot inner tiles of the 1d convolution kernels.
 *
 * KB kernels x NT output positions are accumulated in registers across the
 * whole tap loop; each output element is a single fixed-order reduction, so
 * results do not depend on threading. Instantiated for float and double via
 * the TILE_TEMPLATE macro.
 */
#ifndef SINCRES_KERNELS_H
#define SINCRES_KERNELS_H

#include <string.h>
#include <stddef.h>

#define SINCRES_KB 4
#define SINCRES_NT 64

#define TILE_TEMPLATE(REAL, SUFFIX)                                          \
/* y[kk, ns+n] = sum_{c,t} x[c, base+t+n] * w[kk, c, t] for a full tile.   */\
/* x points at (b, 0, 0); w at (k0, 0, 0); y at (b, k0, ns); base = ns-pad */\
static void c1f_tile_##SUFFIX(const REAL *x, const REAL *w, REAL *y,         \
                              ptrdiff_t C, ptrdiff_t N, ptrdiff_t No,        \
                              ptrdiff_t L, ptrdiff_t base)                   \
{                                                                            \
    REAL acc[SINCRES_KB][SINCRES_NT];                                        \
    memset(acc, 0, sizeof acc);                                              \
    for (ptrdiff_t c = 0; c < C; c++) {                                      \
        const REAL *xr = x + c * N + base;                                   \
        const REAL *wr = w + c * L;                                          \
        for (ptrdiff_t t = 0; t < L; t++) {                                  \
            const REAL w0 = wr[t];                                           \
            const REAL w1 = wr[C * L + t];                                   \
            const REAL w2 = wr[2 * C * L + t];                               \
            const REAL w3 = wr[3 * C * L + t];                               \
            const REAL *xt = xr + t;                                         \
            for (ptrdiff_t n = 0; n < SINCRES_NT; n++) {                     \
                const REAL xv = xt[n];                                       \
                acc[0][n] += w0 * xv;                                        \
                acc[1][n] += w1 * xv;                                        \
                acc[2][n] += w2 * xv;                                        \
                acc[3][n] += w3 * xv;                                        \
            }                                                                \
        }                                                                    \
    }                                                                        \
    for (ptrdiff_t kk = 0; kk < SINCRES_KB; kk++)                            \
        memcpy(y + kk * No, acc[kk], sizeof acc[0]);                         \
}                                                                            \
                                                                             \
/* dw[kk, ts+t] += sum_{b,n} dy[b, k0+kk, n] * x[b, c, n-pad+ts+t]        */\
/* x at (0,0,0); dy at (0, k0, 0); dw at (k0, c, ts); n runs [nlo, nhi)   */\
static void c1w_tile_##SUFFIX(const REAL *x, const REAL *dy, REAL *dw,       \
                              ptrdiff_t B, ptrdiff_t C, ptrdiff_t N,         \
                              ptrdiff_t K, ptrdiff_t No, ptrdiff_t L,        \
                              ptrdiff_t nlo, ptrdiff_t nhi,                  \
                              ptrdiff_t c, ptrdiff_t ts, ptrdiff_t pad)      \
{                                                                            \
    REAL acc[SINCRES_KB][SINCRES_NT];                                        \
    memset(acc, 0, sizeof acc);                                              \
    for (ptrdiff_t b = 0; b < B; b++) {                                      \
        const REAL *xr = x + (b * C + c) * N + ts - pad;                     \
        const REAL *gr = dy + b * K * No;                                    \
        for (ptrdiff_t n = nlo; n < nhi; n++) {                              \
            const REAL g0 = gr[n];                                           \
            const REAL g1 = gr[No + n];                                      \
            const REAL g2 = gr[2 * No + n];                                  \
            const REAL g3 = gr[3 * No + n];                                  \
            const REAL *xn = xr + n;                                         \
            for (ptrdiff_t t = 0; t < SINCRES_NT; t++) {                     \
                const REAL xv = xn[t];                                       \
                acc[0][t] += g0 * xv;                                        \
                acc[1][t] += g1 * xv;                                        \
                acc[2][t] += g2 * xv;                                        \
                acc[3][t] += g3 * xv;                                        \
            }                                                                \
        }                                                                    \
    }                                                                        \
    for (ptrdiff_t kk = 0; kk < SINCRES_KB; kk++)                            \
        memcpy(dw + kk * C * L, acc[kk], sizeof acc[0]);                     \
}

TILE_TEMPLATE(float, f32)
TILE_TEMPLATE(double, f64)

#undef TILE_TEMPLATE

#endif /* SINCRES_KERNELS_H */
