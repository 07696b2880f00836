"""Direct sampling of tree Ising models and Monte-Carlo summaries.

Vertices are drawn in topological order, each from its conditional Bernoulli
law given the parent's realised bit, using exactly one uniform per vertex
(inverse cdf). Streams are Philox counter-based generators keyed by
``(seed, stream)``, so replication ``r`` of a study always sees the same
numbers no matter how replications are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NotSymmetricModel
from .model import MeanParamIsing
from .pmf import Pmf


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by a 64-bit seed and a stream index."""

    seed: int
    stream: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InputError(f"seed {self.seed} is not a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise InputError(f"stream index {self.stream} is negative")

    @property
    def generator(self) -> np.random.Generator:
        """The stream's generator; created on first use and then shared."""
        if self._gen is None:
            ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
            object.__setattr__(self, "_gen", np.random.Generator(np.random.Philox(ss)))
        return self._gen

    def fresh(self) -> "RngStream":
        """Same seed and stream, rewound to the start."""
        return RngStream(self.seed, self.stream)

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator
    raise TypeError(f"expected RngStream, Generator or int seed, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Realisations as rows; column ``i`` holds vertex ``order[i]`` (topological order)."""

    bits: np.ndarray
    order: np.ndarray
    seed: int | None = None
    stream: int | None = None

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def d(self) -> int:
        return self.bits.shape[1]

    def by_vertex(self) -> np.ndarray:
        """Bits with columns permuted to vertex index order."""
        out = np.empty_like(self.bits)
        out[:, self.order] = self.bits
        return out

    def sums(self) -> np.ndarray:
        return self.bits.sum(axis=1, dtype=np.int64)


def _meta(rng):
    if isinstance(rng, RngStream):
        return rng.seed, rng.stream
    return None, None


def _draw(m: MeanParamIsing, u: np.ndarray, p1: np.ndarray, p0: np.ndarray, q_root: float) -> np.ndarray:
    """Turn uniforms ``u[:, i]`` (column ``i`` = ``order[i]``) into bits."""
    order = m.rt.order
    pos = m.rt.position
    par = m.rt.parent
    x = np.empty(u.shape, dtype=np.uint8)
    x[:, 0] = u[:, 0] < q_root
    for i in range(1, len(order)):
        v = order[i]
        pb = x[:, pos[par[v]]]
        x[:, i] = u[:, i] < np.where(pb == 1, p1[v], p0[v])
    return x


def sample_batch(m: MeanParamIsing, n: int, rng=None) -> SampleBatch:
    """``n`` independent realisations, one uniform per vertex each."""
    if n < 0:
        raise InputError("number of draws must be nonnegative")
    T = m.transition_tables()
    u = _generator(rng).random((int(n), m.d))
    bits = _draw(m, u, T[:, 1, 1], T[:, 0, 1], float(m.q[m.rt.root]))
    seed, stream = _meta(rng)
    return SampleBatch(bits, np.asarray(m.rt.order), seed, stream)


def sample_ising(m: MeanParamIsing, rng=None) -> np.ndarray:
    """One realisation indexed by vertex."""
    return sample_batch(m, 1, rng).by_vertex()[0]


def _check_symmetric(m: MeanParamIsing) -> None:
    if not np.all(m.q == 0.5):
        raise NotSymmetricModel("symmetric sampler needs q = 1/2 at every vertex")


def sample_symmetric_batch(m: MeanParamIsing, n: int, rng=None) -> SampleBatch:
    """Root fair coin; every other vertex copies its parent with probability ``(1 + alpha)/2``."""
    _check_symmetric(m)
    if n < 0:
        raise InputError("number of draws must be nonnegative")
    u = _generator(rng).random((int(n), m.d))
    order = m.rt.order
    pos = m.rt.position
    par = m.rt.parent
    x = np.empty(u.shape, dtype=np.uint8)
    x[:, 0] = u[:, 0] < 0.5
    for i in range(1, len(order)):
        v = order[i]
        keep = u[:, i] < 0.5 * (1.0 + m.edge_alpha(par[v], v))
        pb = x[:, pos[par[v]]]
        x[:, i] = np.where(keep, pb, 1 - pb)
    seed, stream = _meta(rng)
    return SampleBatch(x, np.asarray(order), seed, stream)


def sample_symmetric_flip(m: MeanParamIsing, rng=None) -> np.ndarray:
    return sample_symmetric_batch(m, 1, rng).by_vertex()[0]


def _sums(m: MeanParamIsing, n: int, rng, method: str) -> np.ndarray:
    if method == "direct":
        return sample_batch(m, n, rng).sums()
    if method == "symmetric-flip":
        return sample_symmetric_batch(m, n, rng).sums()
    raise InputError(f"unknown sampling method {method!r}")


def monte_carlo_sum_pmf(m: MeanParamIsing, n: int, rng=None, method: str = "direct") -> Pmf:
    """Empirical pmf of ``K`` on ``{0..d}`` from ``n`` draws."""
    if n < 1:
        raise InputError("need at least one draw")
    counts = np.bincount(_sums(m, n, rng, method), minlength=m.d + 1)
    return Pmf.from_raw(counts / n)


@dataclass(frozen=True, eq=False)
class McIntervals:
    """Replicated Monte-Carlo estimates of ``p_K`` and their quantile intervals.

    ``estimates`` has one row per replication and one column per ``k``.
    Bounds are the empirical ``(1-level)/2`` and ``(1+level)/2`` quantiles,
    taken outward (lower/higher order statistic) so that two replications
    give the min/max interval.
    """

    estimates: np.ndarray
    level: float
    n: int
    seed: int

    @property
    def reps(self) -> int:
        return self.estimates.shape[0]

    def _bounds(self, x: np.ndarray):
        a = (1.0 - self.level) / 2.0
        lo = np.quantile(x, a, axis=0, method="lower")
        hi = np.quantile(x, 1.0 - a, axis=0, method="higher")
        return lo, hi

    @property
    def lower(self) -> np.ndarray:
        return self._bounds(self.estimates)[0]

    @property
    def upper(self) -> np.ndarray:
        return self._bounds(self.estimates)[1]

    def tail(self, k: int) -> tuple[float, float]:
        """Interval for ``Pr(K >= k)``."""
        lo, hi = self._bounds(self.estimates[:, k:].sum(axis=1))
        return float(lo), float(hi)

    def point(self, k: int) -> tuple[float, float]:
        return float(self.lower[k]), float(self.upper[k])


def mc_confidence_intervals(
    m: MeanParamIsing,
    n: int,
    reps: int,
    level: float = 0.9,
    seed: int = 0,
    method: str = "direct",
) -> McIntervals:
    """Repeat an ``n``-draw estimate of ``p_K`` ``reps`` times; replication ``r`` uses stream ``r``."""
    if reps < 2:
        raise InputError("need at least two replications")
    if not (0.0 < level < 1.0):
        raise InputError(f"level {level} not in (0, 1)")
    if n < 1:
        raise InputError("need at least one draw per replication")
    est = np.empty((reps, m.d + 1))
    for r in range(reps):
        counts = np.bincount(_sums(m, n, RngStream(seed, r), method), minlength=m.d + 1)
        est[r] = counts / n
    return McIntervals(est, float(level), int(n), int(seed))
