"""Distribution of ``K = sum_v J_v`` and expected allocations by discrete Fourier inversion.

The pgf of ``K`` evaluated at the ``n`` roots of unity ``w**l`` with
``w = exp(-2 pi i / n)`` is the forward DFT of the pmf of ``K`` padded to
length ``n``, so one inverse transform recovers the pmf exactly as long as
``n > d``. Since the pmf is real, only the nodes ``l = 0..n/2`` are evaluated
and the inverse is a real-output transform.

Transform convention (used by :func:`dft` / :func:`idft`)::

    dft(x)[l]  = sum_k x[k] exp(-2 pi i k l / n)
    idft(y)[k] = (1/n) sum_l y[l] exp(+2 pi i k l / n)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pgf
from .errors import InputError, LengthNotPowerOfTwo, ToleranceExceeded
from .model import MeanParamIsing
from .pmf import DEFAULT_TOLERANCE, Pmf, stop_loss, tv_distance

__all__ = [
    "AllocationVector",
    "all_allocations",
    "DftPlan",
    "LARGE_N_FFT",
    "default_n",
    "dft",
    "expected_allocations",
    "idft",
    "stop_loss",
    "sum_pmf",
    "sum_pmf_coefficients",
    "tv_distance",
]

LARGE_N_FFT = 2**13


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_length(n: int) -> int:
    n = int(n)
    if not is_power_of_two(n):
        raise LengthNotPowerOfTwo(f"transform length {n} is not a power of two")
    return n


def default_n(d: int) -> int:
    """Smallest power of two strictly greater than ``d``."""
    return 1 << int(d).bit_length()


@dataclass(frozen=True)
class DftPlan:
    """Transform length plus the evaluation nodes it implies.

    ``nodes[l] = exp(-2 pi i l / n)``, which is ``dft`` of the unit impulse
    at index 1. ``half_nodes`` keeps ``l = 0..n/2``.
    """

    n: int
    sign: int = -1  # exponent sign of the forward kernel

    def __post_init__(self):
        _check_length(self.n)

    @property
    def nodes(self) -> np.ndarray:
        return np.exp(self.sign * 2j * np.pi * np.arange(self.n) / self.n)

    @property
    def half_nodes(self) -> np.ndarray:
        return self.nodes[: self.n // 2 + 1]

    @classmethod
    def for_dimension(cls, d: int, n: int | None = None) -> "DftPlan":
        n = default_n(d) if n is None else _check_length(n)
        if n <= d:
            raise InputError(f"transform length {n} must exceed d={d}")
        return cls(n)


def dft(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    _check_length(x.shape[-1])
    return np.fft.fft(x)


def idft(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    _check_length(y.shape[-1])
    return np.fft.ifft(y)


def _invert_half(values: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfft(values, n)


def _check_tail(raw: np.ndarray, d: int, tolerance: float, what: str) -> None:
    if raw.size > d + 1:
        worst = float(np.abs(raw[d + 1 :]).max())
        if worst > tolerance:
            raise ToleranceExceeded(f"{what} has mass {worst:.3e} beyond k={d}, above {tolerance:g}")


def sum_pmf_coefficients(m: MeanParamIsing, n: int | None = None, backend: str | None = None) -> np.ndarray:
    """Unclipped inverse transform of the sum pgf, length ``n``."""
    plan = DftPlan.for_dimension(m.d, n)
    return _invert_half(pgf.sum_pgf(m, plan.half_nodes, backend=backend), plan.n)


def sum_pmf(
    m: MeanParamIsing,
    n: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    backend: str | None = None,
) -> Pmf:
    """Pmf of ``K`` on ``{0..d}``.

    Args:
        m: the model.
        n: transform length, a power of two above ``d``. Defaults to the
            smallest one; pass :data:`LARGE_N_FFT` for a fixed 8192.
        tolerance: round-off allowance for negative entries, for mass beyond
            ``d`` and for the total.

    Raises:
        LengthNotPowerOfTwo, ToleranceExceeded
    """
    raw = sum_pmf_coefficients(m, n, backend)
    _check_tail(raw, m.d, tolerance, "sum pmf")
    return Pmf.from_raw(raw[: m.d + 1], tolerance=tolerance)


@dataclass(frozen=True, eq=False)
class AllocationVector:
    """``values[k] = E[J_v 1{K = k}]`` for ``k = 0..d``."""

    vertex: int
    values: np.ndarray

    def __len__(self):
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def conditional_mean(self, p_k) -> np.ndarray:
        """``E[J_v | K = k]``, NaN where ``p_K(k) = 0``."""
        p = np.asarray(p_k, dtype=float)[: self.values.size]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(p > 0, self.values / p, np.nan)


def expected_allocations(
    m: MeanParamIsing,
    v: int,
    n: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    backend: str | None = None,
) -> AllocationVector:
    """Expected allocations of ``K`` to vertex ``v``.

    The model is re-rooted at ``v`` and only the ``J_v = 1`` branch of the
    pgf is kept, giving ``sum_k t^k E[J_v 1{K=k}]`` at the Fourier nodes.
    """
    m.tree._check_vertex(v)
    plan = DftPlan.for_dimension(m.d, n)
    raw = _invert_half(pgf.ogfea_pgf(m, v, plan.half_nodes, backend=backend), plan.n)
    _check_tail(raw, m.d, tolerance, f"allocations to vertex {m.tree.labels[v]}")
    vals = raw[: m.d + 1]
    if vals.min() < -tolerance:
        k = int(vals.argmin())
        raise ToleranceExceeded(f"allocation at k={k} is {vals[k]:.3e}, below -{tolerance:g}")
    vals = np.clip(vals, 0.0, None)
    vals.setflags(write=False)
    return AllocationVector(vertex=int(v), values=vals)


def all_allocations(m: MeanParamIsing, n: int | None = None, backend: str | None = None) -> np.ndarray:
    """``(d, d+1)`` array whose row ``v`` is :func:`expected_allocations` for ``v``."""
    return np.vstack([expected_allocations(m, v, n, backend=backend).values for v in range(m.d)])
