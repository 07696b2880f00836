"""Poisson-marginal tree MRF used to approximate a common-``q`` tree Ising model.

``N_root ~ Poisson(lam)`` and every other vertex is
``Binomial(N_parent, alpha_e) + Poisson(lam * (1 - alpha_e))``, which keeps
every marginal ``Poisson(lam)``.

Sum pgf. Given ``N_parent = n`` the subtree of ``v`` contributes
``E[t^{subtree sum} | n] = a_v * b_v**n`` with::

    z_v = t * prod_{children i} b_i
    b_v = 1 - alpha_v + alpha_v * z_v
    a_v = prod_{children i} a_i * exp(lam * (1 - alpha_v) * (z_v - 1))

and the pgf of ``M = sum_v N_v`` is ``prod_{children of r} a_i * exp(lam * (z_r - 1))``.
The ``a`` factors are exponentials, so only their exponents are accumulated.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .distribution import DftPlan, _invert_half
from .errors import AlphaOutOfRange, DimensionTooLarge, DomainError, NotCommonQ, TruncationTooSevere
from .model import MeanParamIsing
from .pgf import build_schedule, get_backend
from .pmf import DEFAULT_TOLERANCE, Pmf, stop_loss
from .sampling import _generator
from .tree import RootedTree, TreeTopology, _alpha_lookup

JOINT_MAX_D = 6
COMMON_Q_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MpmrfModel:
    """Common Poisson mean ``lam`` and one thinning probability per edge (aligned with ``rt.topology.edges``)."""

    rt: RootedTree
    lam: float
    alpha: np.ndarray

    def __post_init__(self):
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise DomainError(f"lambda must be positive, got {self.lam!r}")
        alpha = _alpha_lookup(self.rt.topology, self.alpha).copy()
        bad = np.flatnonzero(~((alpha > 0) & (alpha < 1)))
        if bad.size:
            u, v = self.rt.topology.edges[bad[0]]
            labels = self.rt.topology.labels
            raise AlphaOutOfRange(f"thinning probability {alpha[bad[0]]!r} on ({labels[u]}, {labels[v]}) not in (0, 1)")
        alpha.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def on(cls, tree: TreeTopology, lam: float, alpha, root: int = 0) -> "MpmrfModel":
        return cls(tree.root_at(root), lam, alpha)

    @property
    def tree(self) -> TreeTopology:
        return self.rt.topology

    @property
    def d(self) -> int:
        return self.rt.d

    def parent_alpha(self) -> np.ndarray:
        """``out[v]`` = thinning probability of the edge from ``v``'s parent; 0 at the root."""
        out = np.zeros(self.d)
        for v in range(self.d):
            p = self.rt.parent[v]
            if p >= 0:
                out[v] = self.alpha[self.tree.edge_index(p, v)]
        return out


def build_approx(m: MeanParamIsing) -> MpmrfModel:
    """Poisson approximation of a common-``q`` model with positive edge correlations."""
    q = m.q
    if np.ptp(q) > COMMON_Q_TOL:
        raise NotCommonQ(f"q ranges over [{q.min():.6g}, {q.max():.6g}]; the approximation needs a common q")
    bad = np.flatnonzero(~((m.alpha > 0) & (m.alpha < 1)))
    if bad.size:
        u, v = m.tree.edges[bad[0]]
        raise AlphaOutOfRange(
            f"alpha {m.alpha[bad[0]]!r} on ({m.tree.labels[u]}, {m.tree.labels[v]}) not in (0, 1)"
        )
    return MpmrfModel(m.rt, float(q[0]), m.alpha)


def tv_bound(d: int, q: float) -> float:
    """Upper bound ``1.2 d q^2`` on the total variation distance between the two models."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"q={q!r} not in (0, 1)")
    return 1.2 * d * q * q


def sample_mpmrf_batch(model: MpmrfModel, n: int, rng=None) -> np.ndarray:
    """``(n, d)`` counts indexed by vertex."""
    g = _generator(rng)
    pa = model.parent_alpha()
    out = np.empty((int(n), model.d), dtype=np.int64)
    order = model.rt.order
    out[:, order[0]] = g.poisson(model.lam, n)
    for v in order[1:]:
        a = pa[v]
        out[:, v] = g.binomial(out[:, model.rt.parent[v]], a) + g.poisson(model.lam * (1.0 - a), n)
    return out


def sample_mpmrf(model: MpmrfModel, rng=None) -> np.ndarray:
    return sample_mpmrf_batch(model, 1, rng)[0]


def mpmrf_conditional_pmf(n_pa, alpha: float, lam: float, k):
    """``Pr(N_v = k | N_parent = n_pa)``: Binomial(n_pa, alpha) convolved with Poisson(lam (1 - alpha)).

    Broadcasts over ``n_pa`` and ``k``.
    """
    n_pa = np.asarray(n_pa)
    k = np.asarray(k)
    if np.any(n_pa < 0) or np.any(k < 0) or np.any(n_pa % 1) or np.any(k % 1):
        raise DomainError("counts must be nonnegative integers")
    if not (0.0 <= alpha <= 1.0) or lam < 0:
        raise DomainError(f"need 0 <= alpha <= 1 and lam >= 0, got alpha={alpha!r}, lam={lam!r}")
    n_pa, k = np.broadcast_arrays(n_pa.astype(np.int64), k.astype(np.int64))
    top = int(n_pa.max()) if n_pa.size else 0
    j = np.arange(top + 1).reshape((-1,) + (1,) * n_pa.ndim)
    mu = lam * (1.0 - alpha)
    terms = stats.binom.pmf(j, n_pa, alpha) * stats.poisson.pmf(k - j, mu)
    out = terms.sum(axis=0)
    return float(out) if out.ndim == 0 else out


def mpmrf_joint_pmf(model: MpmrfModel, x):
    """Joint pmf at a count vector or at each row of an ``(n, d)`` array; ``d <= 6``."""
    if model.d > JOINT_MAX_D:
        raise DimensionTooLarge(f"d={model.d} exceeds the joint-pmf limit {JOINT_MAX_D}")
    X = np.asarray(x, dtype=np.int64)
    r = model.rt.root
    p = stats.poisson.pmf(X[..., r], model.lam)
    pa = model.parent_alpha()
    for v in model.rt.order[1:]:
        p = p * mpmrf_conditional_pmf(X[..., model.rt.parent[v]], pa[v], model.lam, X[..., v])
    return float(p) if np.ndim(p) == 0 else p


def _step_alpha(model: MpmrfModel):
    cached = model.__dict__.get("_mpmrf_plan")
    if cached is None:
        sch = build_schedule(model.rt)
        cached = (sch, np.ascontiguousarray(model.parent_alpha()[sch.steps]))
        object.__setattr__(model, "_mpmrf_plan", cached)
    return cached


def mpmrf_sum_pgf(model: MpmrfModel, t, backend: str | None = None):
    """Pgf of ``M = sum_v N_v`` at a scalar or each entry of an array."""
    sch, alpha = _step_alpha(model)
    t = np.asarray(t, dtype=np.complex128)
    vals = get_backend(backend).mpmrf_sum_pgf(
        np.ascontiguousarray(t.reshape(-1)), sch.nchild, sch.first, alpha, model.lam, sch.stack_size
    )
    vals = vals.reshape(t.shape)
    return complex(vals) if vals.ndim == 0 else vals


def support_cap(model: MpmrfModel) -> int:
    return int(math.ceil(max(4 * model.d * model.lam, model.d))) + 64


def tail_bound(model: MpmrfModel, n: int, backend: str | None = None) -> float:
    """Chernoff bound ``min_{s > 1} P_M(s) / s**n`` on ``Pr(M >= n)``."""

    def log_bound(log_s):
        with np.errstate(over="ignore", invalid="ignore"):
            val = mpmrf_sum_pgf(model, math.exp(log_s), backend).real
        if not (val > 0 and math.isfinite(val)):
            return 1e300  # overflow: s too large
        return math.log(val) - n * log_s

    # the objective is convex in log s; shrink the bracket until the pgf stays finite
    hi = math.log(n + 1.0)
    while hi > 1e-6 and log_bound(hi) >= 1e300:
        hi *= 0.5
    res = optimize.minimize_scalar(log_bound, bounds=(1e-9, hi), method="bounded")
    best = min(res.fun, log_bound(1e-9), log_bound(hi))
    return float(min(1.0, math.exp(best)))


def mpmrf_sum_pmf(
    model: MpmrfModel,
    n: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    backend: str | None = None,
) -> Pmf:
    """Pmf of ``M`` on ``{0..n-1}`` by Fourier inversion of :func:`mpmrf_sum_pgf`.

    ``M`` is unbounded, so the inverse transform folds the mass above ``n-1``
    back onto the support. That folded mass is bounded by :func:`tail_bound`
    and stored as ``truncation_error``.

    Raises:
        TruncationTooSevere: the bound exceeds ``tolerance``.
    """
    if n is None:
        n = 1 << support_cap(model).bit_length()
    plan = DftPlan(int(n))
    trunc = tail_bound(model, plan.n, backend)
    if trunc > tolerance:
        raise TruncationTooSevere(f"Pr(M >= {plan.n}) may be up to {trunc:.3e}, above {tolerance:g}")
    raw = _invert_half(mpmrf_sum_pgf(model, plan.half_nodes, backend), plan.n)
    pmf = Pmf.from_raw(raw, tolerance=tolerance)
    return dataclasses.replace(pmf, truncation_error=trunc)


@dataclass(frozen=True)
class ConvexOrderReport:
    mean_k: float
    mean_m: float
    z: np.ndarray
    pi_k: np.ndarray
    pi_m: np.ndarray
    tolerance: float

    @property
    def margins(self) -> np.ndarray:
        return self.pi_m - self.pi_k

    @property
    def means_equal(self) -> bool:
        return abs(self.mean_k - self.mean_m) <= self.tolerance

    @property
    def verdict(self) -> bool:
        return self.means_equal and bool(np.all(self.margins >= -self.tolerance))

    def __bool__(self):
        return self.verdict


def check_convex_order(p_k, p_m, tolerance: float = 1e-8) -> ConvexOrderReport:
    """Test ``K <=_cx M``: equal means and ``pi_M(z) >= pi_K(z)`` on the integers of the joint support."""
    a = np.asarray(p_k, dtype=float)
    b = np.asarray(p_m, dtype=float)
    z = np.arange(max(a.size, b.size))
    return ConvexOrderReport(
        mean_k=float(np.arange(a.size) @ a),
        mean_m=float(np.arange(b.size) @ b),
        z=z,
        pi_k=np.atleast_1d(stop_loss(a, z)),
        pi_m=np.atleast_1d(stop_loss(b, z)),
        tolerance=tolerance,
    )
