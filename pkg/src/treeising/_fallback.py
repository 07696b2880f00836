"""Pure-numpy versions of the kernels in ``_kernels.pyx``.

Same signatures and schedule semantics; vectorised over evaluation points
instead of blocked.
"""

import numpy as np

BACKEND = "python"


def ising_pgf(T, nchild, first, c00, c01, c10, c11, q_root, root_only, stack_size):
    T = np.asarray(T, dtype=np.complex128)
    m, dt = T.shape
    d = len(nchild)
    if dt not in (1, d):
        raise ValueError("T must have 1 or d columns")
    stack = []
    ones = np.ones(m, dtype=np.complex128)
    for s in range(d):
        t = T[:, 0] if dt == 1 else T[:, s]
        if nchild[s] > 0:
            Z, X = stack.pop()
        else:
            Z, X = ones, ones
        tX = t * X
        if s == d - 1:
            if root_only:
                return q_root * tX
            return (1.0 - q_root) * Z + q_root * tX
        z = c00[s] * Z + c01[s] * tX
        x = c10[s] * Z + c11[s] * tX
        if first[s]:
            stack.append((z, x))
        else:
            pz, px = stack[-1]
            stack[-1] = (pz * z, px * x)
    raise AssertionError("schedule has no root step")


def mpmrf_sum_pgf(t, nchild, first, alpha, lam, stack_size):
    t = np.asarray(t, dtype=np.complex128)
    d = len(nchild)
    stack = []
    ones = np.ones(t.shape, dtype=np.complex128)
    expo = np.zeros(t.shape, dtype=np.complex128)
    for s in range(d):
        B = stack.pop() if nchild[s] > 0 else ones
        z = t * B
        if s == d - 1:
            return np.exp(expo + lam * (z - 1.0))
        a = alpha[s]
        expo = expo + lam * (1.0 - a) * (z - 1.0)
        b = 1.0 - a + a * z
        if first[s]:
            stack.append(b)
        else:
            stack[-1] = stack[-1] * b
    raise AssertionError("schedule has no root step")
