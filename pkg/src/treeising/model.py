"""Mean-parameterised tree-structured Ising models.

A model is a rooted tree, a vector ``q`` of Bernoulli means and one Pearson
correlation ``alpha`` per edge. The joint pmf factorises as the root marginal
times one parent-to-child conditional per non-root vertex, so no normalising
constant appears anywhere.

The ``brute_force_*`` functions enumerate ``{0,1}^d`` and exist as oracles for
the generating-function path; they refuse ``d > 20``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionTooLarge,
    DomainError,
    InadmissibleModel,
    LengthMismatch,
    RootHasNoParent,
)
from .pmf import Pmf
from .tree import RootedTree, TreeTopology, _alpha_lookup, path

BRUTE_FORCE_MAX_D = 20
ADMISSIBILITY_MARGIN = 1e-12


def _check_prob(*qs):
    for q in qs:
        if not (0.0 < q < 1.0):
            raise DomainError(f"probability {q!r} not in the open interval (0, 1)")


def sigma(q_u: float, q_v: float) -> float:
    """Geometric mean of the two Bernoulli standard deviations squared."""
    _check_prob(q_u, q_v)
    return math.sqrt(q_u * q_v * (1.0 - q_u) * (1.0 - q_v))


def alpha_bounds(q_u: float, q_v: float) -> tuple[float, float]:
    """Open interval of correlations keeping every cell of the 2x2 table positive."""
    _check_prob(q_u, q_v)
    odds = (q_u * q_v) / ((1.0 - q_u) * (1.0 - q_v))
    cross = ((1.0 - q_u) * q_v) / (q_u * (1.0 - q_v))
    lo = -min(math.sqrt(odds), math.sqrt(1.0 / odds))
    hi = min(math.sqrt(cross), math.sqrt(1.0 / cross))
    return lo, hi


@dataclass(frozen=True)
class Violation:
    kind: str  # "q" or "alpha"
    where: str
    value: float
    bounds: tuple[float, float]

    def __str__(self):
        lo, hi = self.bounds
        return f"{self.kind} at {self.where} = {self.value!r} outside ({lo:.6g}, {hi:.6g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


@dataclass(frozen=True, eq=False)
class MeanParamIsing:
    """Tree Ising model in mean parameterisation.

    Attributes:
        rt: the rooted tree; the root only fixes an order of conditioning and
            has no distributional effect.
        q: ``q[v] = E[J_v]``, shape ``(d,)``.
        alpha: correlations aligned with ``rt.topology.edges``.

    The constructor validates admissibility unless ``check=False``; use
    :func:`validate` to get a report instead of an exception.
    """

    rt: RootedTree
    q: np.ndarray
    alpha: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        t = self.rt.topology
        q = np.asarray(self.q, dtype=float)
        if q.ndim == 0:
            q = np.full(t.d, float(q))
        if q.shape != (t.d,):
            raise LengthMismatch(f"q has shape {q.shape}, expected ({t.d},)")
        alpha = _alpha_lookup(t, self.alpha)
        q = q.copy()
        alpha = alpha.copy()
        q.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", alpha)
        if self.check:
            report = validate(self)
            if not report.ok:
                raise InadmissibleModel(report)

    @classmethod
    def on(cls, tree: TreeTopology, q, alpha, root: int = 0, check: bool = True) -> "MeanParamIsing":
        return cls(tree.root_at(root), q, alpha, check=check)

    @property
    def tree(self) -> TreeTopology:
        return self.rt.topology

    @property
    def d(self) -> int:
        return self.rt.topology.d

    def reroot(self, r: int) -> "MeanParamIsing":
        if r == self.rt.root:
            return self
        return MeanParamIsing(self.rt.reroot(r), self.q, self.alpha, check=False)

    def edge_alpha(self, u: int, v: int) -> float:
        return float(self.alpha[self.tree.edge_index(u, v)])

    def transition_tables(self) -> np.ndarray:
        """``T[v, x_pa, x_v] = Pr(J_v = x_v | J_pa(v) = x_pa)``; the root row holds its marginal twice."""
        d = self.d
        T = np.empty((d, 2, 2))
        par = self.rt.parent
        for v in range(d):
            p = par[v]
            if p < 0:
                T[v, :, 0] = 1.0 - self.q[v]
                T[v, :, 1] = self.q[v]
                continue
            qv, qp = self.q[v], self.q[p]
            c = self.edge_alpha(p, v) * math.sqrt(qp * qv * (1 - qp) * (1 - qv))
            T[v, 0, 1] = qv - c / (1.0 - qp)
            T[v, 0, 0] = 1.0 - T[v, 0, 1]
            T[v, 1, 1] = qv + c / qp
            T[v, 1, 0] = 1.0 - T[v, 1, 1]
        return T


def validate(m: MeanParamIsing, margin: float = ADMISSIBILITY_MARGIN) -> ValidationReport:
    """Check ``0 < q_v < 1`` and each edge correlation against its open interval.

    ``margin`` shrinks the interval so that limit cases, which produce zero
    probabilities downstream, are rejected.
    """
    t = m.tree
    out = []
    qs_ok = np.ones(t.d, dtype=bool)
    for v in range(t.d):
        qv = float(m.q[v])
        if not (margin < qv < 1.0 - margin) or not math.isfinite(qv):
            qs_ok[v] = False
            out.append(Violation("q", f"vertex {t.labels[v]}", qv, (0.0, 1.0)))
    for i, (u, v) in enumerate(t.edges):
        a = float(m.alpha[i])
        where = f"edge ({t.labels[u]}, {t.labels[v]})"
        if not (qs_ok[u] and qs_ok[v]):
            if not (-1.0 < a < 1.0):
                out.append(Violation("alpha", where, a, (-1.0, 1.0)))
            continue
        lo, hi = alpha_bounds(float(m.q[u]), float(m.q[v]))
        if not (lo + margin < a < hi - margin):
            out.append(Violation("alpha", where, a, (lo, hi)))
    return ValidationReport(tuple(out))


def _bit(x, name):
    if x not in (0, 1):
        raise DomainError(f"{name} must be 0 or 1, got {x!r}")
    return int(x)


def conditional_pmf(m: MeanParamIsing, v: int, x_v: int, x_pa: int) -> float:
    """``Pr(J_v = x_v | J_pa(v) = x_pa)`` under the model's rooting."""
    m.tree._check_vertex(v)
    if m.rt.parent[v] < 0:
        raise RootHasNoParent(f"vertex {m.tree.labels[v]} is the root")
    p = m.rt.parent[v]
    x_v, x_pa = _bit(x_v, "x_v"), _bit(x_pa, "x_pa")
    c = m.edge_alpha(p, v) * sigma(m.q[p], m.q[v])
    qv, qp = m.q[v], m.q[p]
    one = qv + c / qp if x_pa else qv - c / (1.0 - qp)
    return float(one if x_v else 1.0 - one)


def pair_pmf(m: MeanParamIsing, edge: tuple[int, int], x_u: int, x_v: int) -> float:
    u, v = edge
    a = m.edge_alpha(u, v)  # raises NotAnEdge
    x_u, x_v = _bit(x_u, "x_u"), _bit(x_v, "x_v")
    qu, qv = m.q[u], m.q[v]
    pu = qu if x_u else 1.0 - qu
    pv = qv if x_v else 1.0 - qv
    sign = -1.0 if (x_u + x_v) % 2 else 1.0
    return float(pu * pv + a * sign * sigma(qu, qv))


def joint_pmf(m: MeanParamIsing, x) -> float | np.ndarray:
    """Joint pmf at one bit vector ``x`` or at each row of a ``(n, d)`` array."""
    X = np.asarray(x)
    if X.shape[-1:] != (m.d,):
        raise LengthMismatch(f"state has length {X.shape[-1:] or 0}, expected {m.d}")
    if not np.all((X == 0) | (X == 1)):
        raise DomainError("states must be bit vectors")
    X = X.astype(np.intp)
    T = m.transition_tables()
    par = np.asarray(m.rt.parent)
    r = m.rt.root
    p = np.where(X[..., r] == 1, m.q[r], 1.0 - m.q[r])
    for v in m.rt.order[1:]:
        p = p * T[v, X[..., par[v]], X[..., v]]
    return float(p) if p.ndim == 0 else p


def correlation(m: MeanParamIsing, u: int, v: int) -> float:
    """Pearson correlation of ``J_u`` and ``J_v``: product of edge correlations along the path."""
    out = 1.0
    for a, b in path(m.tree, u, v):
        out *= m.edge_alpha(a, b)
    return out


def all_states(d: int) -> np.ndarray:
    """Every bit vector of length ``d``; row ``i`` holds the binary digits of ``i`` (vertex 0 = least significant)."""
    if d > BRUTE_FORCE_MAX_D:
        raise DimensionTooLarge(f"d={d} exceeds the enumeration limit {BRUTE_FORCE_MAX_D}")
    idx = np.arange(2**d, dtype=np.int64)
    return ((idx[:, None] >> np.arange(d)) & 1).astype(np.uint8)


def joint_table(m: MeanParamIsing) -> np.ndarray:
    """All ``2**d`` joint probabilities, indexed like :func:`all_states`."""
    return joint_pmf(m, all_states(m.d))


def brute_force_sum_pmf(m: MeanParamIsing) -> Pmf:
    X = all_states(m.d)
    p = joint_pmf(m, X)
    k = X.sum(axis=1)
    return Pmf.from_raw(np.bincount(k, weights=p, minlength=m.d + 1), tolerance=1e-12)


def brute_force_allocations(m: MeanParamIsing, v: int) -> np.ndarray:
    """``E[J_v 1{K = k}]`` for ``k = 0..d`` by enumeration."""
    m.tree._check_vertex(v)
    X = all_states(m.d)
    p = joint_pmf(m, X)
    k = X.sum(axis=1)
    return np.bincount(k, weights=p * X[:, v], minlength=m.d + 1)
