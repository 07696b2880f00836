/* Inner loops of the generating-function kernels.
 *
 * Each block holds TI_BLOCK evaluation points as split real/imaginary
 * arrays. A source row may coincide with the destination row (a vertex
 * whose first child finished last reuses that child's slot), but only at
 * the same index, so there is no loop-carried dependency.
 */
#ifndef TI_KERNEL_LOOPS_H
#define TI_KERNEL_LOOPS_H

#define TI_BLOCK 64

#if defined(__x86_64__) || defined(__SSE__)
#include <xmmintrin.h>
static unsigned int ti_ftz_on(void) {
    unsigned int old = _mm_getcsr();
    _mm_setcsr(old | 0x8040);
    return old;
}
static void ti_ftz_restore(unsigned int old) { _mm_setcsr(old); }
#else
static unsigned int ti_ftz_on(void) { return 0; }
static void ti_ftz_restore(unsigned int old) { (void)old; }
#endif

#if defined(__GNUC__) && !defined(__clang__)
#define TI_IVDEP _Pragma("GCC ivdep")
#elif defined(__clang__)
#define TI_IVDEP _Pragma("clang loop vectorize(assume_safety)")
#else
#define TI_IVDEP
#endif

/* zeta/xi of one vertex from its children's products; written to d, or
 * multiplied into d when merge is nonzero. s and d point at 4 rows:
 * zeta re, zeta im, xi re, xi im. */
static void ti_ising_step(const double *tr, const double *ti, const double *s, double *d,
                          double a00, double a01, double a10, double a11, int merge) {
    const double *szr = s, *szi = s + TI_BLOCK, *sxr = s + 2 * TI_BLOCK, *sxi = s + 3 * TI_BLOCK;
    double *dzr = d, *dzi = d + TI_BLOCK, *dxr = d + 2 * TI_BLOCK, *dxi = d + 3 * TI_BLOCK;
    int b;
    if (!merge) {
        TI_IVDEP
        for (b = 0; b < TI_BLOCK; b++) {
            double zr = szr[b], zi = szi[b], xr = sxr[b], xi = sxi[b];
            double txr = tr[b] * xr - ti[b] * xi;
            double txi = tr[b] * xi + ti[b] * xr;
            dzr[b] = a00 * zr + a01 * txr;
            dzi[b] = a00 * zi + a01 * txi;
            dxr[b] = a10 * zr + a11 * txr;
            dxi[b] = a10 * zi + a11 * txi;
        }
    } else {
        TI_IVDEP
        for (b = 0; b < TI_BLOCK; b++) {
            double zr = szr[b], zi = szi[b], xr = sxr[b], xi = sxi[b];
            double txr = tr[b] * xr - ti[b] * xi;
            double txi = tr[b] * xi + ti[b] * xr;
            double nzr = a00 * zr + a01 * txr, nzi = a00 * zi + a01 * txi;
            double nxr = a10 * zr + a11 * txr, nxi = a10 * zi + a11 * txi;
            double ar = dzr[b], ai = dzi[b];
            dzr[b] = ar * nzr - ai * nzi;
            dzi[b] = ar * nzi + ai * nzr;
            ar = dxr[b];
            ai = dxi[b];
            dxr[b] = ar * nxr - ai * nxi;
            dxi[b] = ar * nxi + ai * nxr;
        }
    }
}

/* b = 1 - a + a z with z = t * (children's b product); the exponent
 * accumulates w (z - 1). s and d point at 2 rows: re, im. */
static void ti_mpmrf_step(const double *tr, const double *ti, const double *s, double *d,
                          double *er, double *ei, double a, double w, int merge) {
    const double *sbr = s, *sbi = s + TI_BLOCK;
    double *dbr = d, *dbi = d + TI_BLOCK;
    int b;
    if (!merge) {
        TI_IVDEP
        for (b = 0; b < TI_BLOCK; b++) {
            double zr = tr[b] * sbr[b] - ti[b] * sbi[b];
            double zi = tr[b] * sbi[b] + ti[b] * sbr[b];
            er[b] += w * (zr - 1.0);
            ei[b] += w * zi;
            dbr[b] = 1.0 - a + a * zr;
            dbi[b] = a * zi;
        }
    } else {
        TI_IVDEP
        for (b = 0; b < TI_BLOCK; b++) {
            double zr = tr[b] * sbr[b] - ti[b] * sbi[b];
            double zi = tr[b] * sbi[b] + ti[b] * sbr[b];
            double nbr = 1.0 - a + a * zr, nbi = a * zi;
            double ar = dbr[b], ai = dbi[b];
            er[b] += w * (zr - 1.0);
            ei[b] += w * zi;
            dbr[b] = ar * nbr - ai * nbi;
            dbi[b] = ar * nbi + ai * nbr;
        }
    }
}

#endif
