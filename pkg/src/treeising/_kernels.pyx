# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled leaf-to-root generating-function recursions.

Both kernels walk a post-order schedule (see ``treeising.pgf.PgfPlan``) and
keep at most ``stack_size`` partial child products alive. Evaluation points
are processed in blocks of ``TI_BLOCK`` so the inner loops (in
``_kernel_loops.h``) run over contiguous real/imaginary arrays and vectorise.
A short final block is padded with ``t = 0``. Subnormals are flushed to zero
while a kernel runs; on the unit circle the recursion decays geometrically
on long chains and would otherwise spend most of its time in subnormal
arithmetic.
"""

import numpy as np

from libc.stdlib cimport malloc, free
from libc.math cimport exp, cos, sin

cdef extern from "_kernel_loops.h" nogil:
    enum: TI_BLOCK
    unsigned int ti_ftz_on()
    void ti_ftz_restore(unsigned int old)
    void ti_ising_step(const double *tr, const double *ti, const double *s, double *d,
                       double a00, double a01, double a10, double a11, int merge)
    void ti_mpmrf_step(const double *tr, const double *ti, const double *s, double *d,
                       double *er, double *ei, double a, double w, int merge)

BACKEND = "compiled"
BLOCK = TI_BLOCK


def ising_pgf(const double complex[:, ::1] T,
              const int[::1] nchild,
              const signed char[::1] first,
              const double[::1] c00, const double[::1] c01,
              const double[::1] c10, const double[::1] c11,
              double q_root, bint root_only, int stack_size):
    """Evaluate the tree Ising pgf at each row of ``T``.

    ``T`` has shape ``(m, 1)`` (same argument at every vertex) or ``(m, d)``
    with columns in schedule order. ``cAB[s] = Pr(J = B | parent = A)`` for the
    vertex at step ``s``; the last step is the root.
    """
    cdef Py_ssize_t m = T.shape[0], dt = T.shape[1], d = nchild.shape[0]
    cdef Py_ssize_t start, nb, b, s, top, k
    cdef Py_ssize_t row = 4 * TI_BLOCK
    cdef double tr[TI_BLOCK]
    cdef double ti[TI_BLOCK]
    cdef double *stk
    cdef double *src
    cdef double txr, txi, zr, zi
    cdef double one_minus_q = 1.0 - q_root
    cdef unsigned int csr
    cdef int merge
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] res = out
    if m == 0:
        return out
    if dt != 1 and dt != d:
        raise ValueError("T must have 1 or d columns")

    # rows 0..stack_size-1: stack; row stack_size: constant ones
    stk = <double *> malloc((stack_size + 1) * row * sizeof(double))
    if stk == NULL:
        raise MemoryError()
    with nogil:
        csr = ti_ftz_on()
        k = stack_size * row
        for b in range(TI_BLOCK):
            stk[k + b] = 1.0
            stk[k + TI_BLOCK + b] = 0.0
            stk[k + 2 * TI_BLOCK + b] = 1.0
            stk[k + 3 * TI_BLOCK + b] = 0.0
        start = 0
        while start < m:
            nb = m - start
            if nb > TI_BLOCK:
                nb = TI_BLOCK
            for b in range(nb, TI_BLOCK):
                tr[b] = 0.0
                ti[b] = 0.0
            if dt == 1:
                for b in range(nb):
                    tr[b] = T[start + b, 0].real
                    ti[b] = T[start + b, 0].imag
            top = -1
            for s in range(d):
                if dt != 1:
                    for b in range(nb):
                        tr[b] = T[start + b, s].real
                        ti[b] = T[start + b, s].imag
                if nchild[s] > 0:
                    src = stk + top * row
                    top -= 1
                else:
                    src = stk + stack_size * row
                if s == d - 1:
                    for b in range(nb):
                        txr = tr[b] * src[2 * TI_BLOCK + b] - ti[b] * src[3 * TI_BLOCK + b]
                        txi = tr[b] * src[3 * TI_BLOCK + b] + ti[b] * src[2 * TI_BLOCK + b]
                        if root_only:
                            zr = q_root * txr
                            zi = q_root * txi
                        else:
                            zr = one_minus_q * src[b] + q_root * txr
                            zi = one_minus_q * src[TI_BLOCK + b] + q_root * txi
                        res[start + b] = zr + 1j * zi
                    break
                merge = 0 if first[s] else 1
                if not merge:
                    top += 1
                ti_ising_step(tr, ti, src, stk + top * row, c00[s], c01[s], c10[s], c11[s], merge)
            start += nb
        ti_ftz_restore(csr)
    free(stk)
    return out


def mpmrf_sum_pgf(const double complex[::1] t,
                  const int[::1] nchild,
                  const signed char[::1] first,
                  const double[::1] alpha,
                  double lam, int stack_size):
    """Pgf of the sum of a Poisson-marginal tree MRF at each entry of ``t``.

    Per vertex the conditional pgf of its subtree given the parent count ``n``
    is ``a * b**n``; only the ``b`` products need a stack since every ``a``
    is an exponential and accumulates as a sum of exponents.
    """
    cdef Py_ssize_t m = t.shape[0], d = nchild.shape[0]
    cdef Py_ssize_t start, nb, b, s, top, k
    cdef Py_ssize_t row = 2 * TI_BLOCK
    cdef double tr[TI_BLOCK]
    cdef double ti[TI_BLOCK]
    cdef double er[TI_BLOCK]
    cdef double ei[TI_BLOCK]
    cdef double *stk
    cdef double *src
    cdef double zr, zi, ar, ai, a, g
    cdef unsigned int csr
    cdef int merge
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] res = out
    if m == 0:
        return out
    stk = <double *> malloc((stack_size + 1) * row * sizeof(double))
    if stk == NULL:
        raise MemoryError()
    with nogil:
        csr = ti_ftz_on()
        k = stack_size * row
        for b in range(TI_BLOCK):
            stk[k + b] = 1.0
            stk[k + TI_BLOCK + b] = 0.0
        start = 0
        while start < m:
            nb = m - start
            if nb > TI_BLOCK:
                nb = TI_BLOCK
            for b in range(TI_BLOCK):
                tr[b] = 0.0
                ti[b] = 0.0
                er[b] = 0.0
                ei[b] = 0.0
            for b in range(nb):
                tr[b] = t[start + b].real
                ti[b] = t[start + b].imag
            top = -1
            for s in range(d):
                if nchild[s] > 0:
                    src = stk + top * row
                    top -= 1
                else:
                    src = stk + stack_size * row
                if s == d - 1:
                    for b in range(nb):
                        zr = tr[b] * src[b] - ti[b] * src[TI_BLOCK + b]
                        zi = tr[b] * src[TI_BLOCK + b] + ti[b] * src[b]
                        ar = er[b] + lam * (zr - 1.0)
                        ai = ei[b] + lam * zi
                        g = exp(ar)
                        res[start + b] = g * cos(ai) + 1j * (g * sin(ai))
                    break
                a = alpha[s]
                merge = 0 if first[s] else 1
                if not merge:
                    top += 1
                ti_mpmrf_step(tr, ti, src, stk + top * row, er, ei, a, lam * (1.0 - a), merge)
            start += nb
        ti_ftz_restore(csr)
    free(stk)
    return out
