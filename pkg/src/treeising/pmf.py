"""Probability mass functions on ``{0, 1, ..., n-1}``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ToleranceExceeded

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Pmf:
    """Nonnegative probability vector indexed by the integers ``0..len-1``.

    Build from noisy input (FFT output, Monte-Carlo counts) with
    :meth:`from_raw`, which applies the clipping policy. ``truncation_error``
    records mass known to lie outside the stored support.
    """

    values: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE
    truncation_error: float = 0.0

    @classmethod
    def from_raw(cls, raw, tolerance: float = DEFAULT_TOLERANCE, truncation_error: float = 0.0) -> "Pmf":
        """Clip round-off and renormalise.

        Entries below ``-tolerance`` or a total farther than ``tolerance``
        from ``1 - truncation_error`` raise :class:`ToleranceExceeded`.
        """
        v = np.array(raw, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("pmf values must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise ToleranceExceeded("pmf has non-finite entries")
        worst = v.min()
        if worst < -tolerance:
            k = int(v.argmin())
            raise ToleranceExceeded(f"pmf entry {k} is {worst:.3e}, below -{tolerance:g}")
        v = np.clip(v, 0.0, None)
        total = v.sum()
        if abs(total - (1.0 - truncation_error)) > tolerance:
            raise ToleranceExceeded(f"pmf sums to {total!r}, off by more than {tolerance:g}")
        v *= (1.0 - truncation_error) / total
        v.setflags(write=False)
        return cls(values=v, tolerance=tolerance, truncation_error=truncation_error)

    def __len__(self):
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.values.size)

    def mean(self) -> float:
        return float(self.support @ self.values)

    def variance(self) -> float:
        k = self.support
        m = self.mean()
        return float(((k - m) ** 2) @ self.values)

    def tail(self, k: int) -> float:
        """``Pr(X >= k)``."""
        return float(self.values[k:].sum())

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.values)

    def stop_loss(self, z) -> float | np.ndarray:
        return stop_loss(self, z)

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(max(n, self.values.size))
        out[: self.values.size] = self.values
        return out


def stop_loss(p, z):
    """``E[(X - z)_+]``, accepting a scalar or an array of thresholds."""
    v = np.asarray(p, dtype=float)
    k = np.arange(v.size)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("stop-loss threshold must be nonnegative")
    out = np.maximum(k[None, :] - z_arr.reshape(-1, 1), 0.0) @ v
    return float(out[0]) if z_arr.ndim == 0 else out


def tv_distance(p, q) -> float:
    """Total variation distance: half the L1 distance of the zero-padded vectors."""
    a = np.asarray(p, dtype=float)
    b = np.asarray(q, dtype=float)
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))
