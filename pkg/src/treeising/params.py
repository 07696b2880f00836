"""Exponential-family parameterisations of tree Ising models and conversions.

Three forms are supported besides the mean parameterisation, all with
``x in {0,1}^d`` and an edge set taken from a tree:

* natural:   ``sum_v eta_v x_v + sum_e eta_e x_u x_v - A``
* canonical: ``sum_v theta_v y_v + sum_e theta_e y_u y_v - Z`` with spins
  ``y = 2x - 1``
* centered:  ``sum_v x_v logit(kappa_v) + sum_e eta_e (x_u - kappa_u)(x_v - kappa_v) - B``

Normalising constants are log-sum-exps over ``{0,1}^d`` and are always
recomputed from the parameters. Everything that touches a probability table
is limited to ``d <= 20``.

Conversions to and from the mean parameterisation go through an explicit
:class:`JointTable`. Natural and canonical parameters are related by the
affine change of variables ``x = (y + 1) / 2``::

    theta_e = eta_e / 4,   theta_v = eta_v / 2 + sum_{j ~ v} eta_vj / 4

Natural parameters of a table are read off by Moebius inversion of the log
probabilities over the subset lattice; for an Ising model on the tree every
coefficient other than singletons and tree edges vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize, special

from .errors import DimensionTooLarge, DomainError, LengthMismatch, NotAnIsingModel, ToleranceExceeded
from .model import BRUTE_FORCE_MAX_D, MeanParamIsing, all_states, joint_table
from .tree import TreeTopology

HIGHER_ORDER_TOL = 1e-8
TABLE_SUM_TOL = 1e-12


def _guard(d: int) -> None:
    if d > BRUTE_FORCE_MAX_D:
        raise DimensionTooLarge(f"d={d} exceeds the table limit {BRUTE_FORCE_MAX_D}")


def _vec(x, n: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = np.full(n, float(a))
    if a.shape != (n,):
        raise LengthMismatch(f"{name} has shape {a.shape}, expected ({n},)")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    a = a.copy()
    a.setflags(write=False)
    return a


def _edge_cols(tree: TreeTopology) -> tuple[np.ndarray, np.ndarray]:
    if not tree.edges:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    e = np.asarray(tree.edges, dtype=np.intp)
    return e[:, 0], e[:, 1]


def _neighbour_sum(tree: TreeTopology, w: np.ndarray) -> np.ndarray:
    """``out[v] = sum of w_e over edges e incident to v``."""
    u, v = _edge_cols(tree)
    out = np.zeros(tree.d)
    np.add.at(out, u, w)
    np.add.at(out, v, w)
    return out


@dataclass(frozen=True, eq=False)
class JointTable:
    """Probabilities of all ``2**d`` bit vectors, indexed like :func:`~treeising.model.all_states`."""

    d: int
    probs: np.ndarray

    def __post_init__(self):
        _guard(self.d)
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2**self.d,):
            raise LengthMismatch(f"table has shape {p.shape}, expected ({2 ** self.d},)")
        if not np.all(p > 0):
            raise DomainError("table entries must be strictly positive")
        if abs(p.sum() - 1.0) > TABLE_SUM_TOL:
            raise ToleranceExceeded(f"table sums to {p.sum()!r}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_log_weights(cls, d: int, logw: np.ndarray) -> tuple["JointTable", float]:
        """Normalise ``exp(logw)``; returns the table and the log normaliser."""
        norm = float(special.logsumexp(logw))
        return cls(d, np.exp(logw - norm)), norm

    def marginals(self) -> np.ndarray:
        X = all_states(self.d)
        return self.probs @ X

    def pair(self, u: int, v: int) -> np.ndarray:
        """2x2 table ``P[x_u, x_v]``."""
        X = all_states(self.d)
        out = np.zeros((2, 2))
        np.add.at(out, (X[:, u], X[:, v]), self.probs)
        return out

    def max_abs_diff(self, other: "JointTable") -> float:
        return float(np.abs(self.probs - other.probs).max())


class _Exponential:
    """Shared table machinery; subclasses define ``tree`` and ``_exponent``."""

    tree: TreeTopology

    @property
    def d(self) -> int:
        return self.tree.d

    def _exponent(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def _table_and_norm(self) -> tuple[JointTable, float]:
        _guard(self.d)
        return JointTable.from_log_weights(self.d, self._exponent(all_states(self.d)))

    @property
    def norm(self) -> float:
        return self._table_and_norm[1]

    def table(self) -> JointTable:
        return self._table_and_norm[0]


@dataclass(frozen=True, eq=False)
class NaturalParamIsing(_Exponential):
    tree: TreeTopology
    eta_vertex: np.ndarray
    eta_edge: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta_vertex", _vec(self.eta_vertex, self.tree.d, "eta_vertex"))
        object.__setattr__(self, "eta_edge", _vec(self.eta_edge, len(self.tree.edges), "eta_edge"))

    @property
    def norm_A(self) -> float:
        return self.norm

    def _exponent(self, X):
        u, v = _edge_cols(self.tree)
        Xf = X.astype(float)
        return Xf @ self.eta_vertex + (Xf[:, u] * Xf[:, v]) @ self.eta_edge


@dataclass(frozen=True, eq=False)
class CanonicalParamIsing(_Exponential):
    tree: TreeTopology
    theta_vertex: np.ndarray
    theta_edge: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta_vertex", _vec(self.theta_vertex, self.tree.d, "theta_vertex"))
        object.__setattr__(self, "theta_edge", _vec(self.theta_edge, len(self.tree.edges), "theta_edge"))

    @property
    def norm_Z(self) -> float:
        return self.norm

    def _exponent(self, X):
        u, v = _edge_cols(self.tree)
        Y = 2.0 * X - 1.0
        return Y @ self.theta_vertex + (Y[:, u] * Y[:, v]) @ self.theta_edge


@dataclass(frozen=True, eq=False)
class CenteredParamIsing(_Exponential):
    tree: TreeTopology
    kappa: np.ndarray
    eta_edge: np.ndarray

    def __post_init__(self):
        kappa = _vec(self.kappa, self.tree.d, "kappa")
        if not np.all((kappa > 0) & (kappa < 1)):
            raise DomainError("kappa must lie strictly inside (0, 1)")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "eta_edge", _vec(self.eta_edge, len(self.tree.edges), "eta_edge"))

    @property
    def norm_B(self) -> float:
        return self.norm

    def _exponent(self, X):
        u, v = _edge_cols(self.tree)
        C = X - self.kappa
        return X @ special.logit(self.kappa) + (C[:, u] * C[:, v]) @ self.eta_edge


def exponential_to_table(model: _Exponential) -> JointTable:
    return model.table()


def mean_to_table(m: MeanParamIsing) -> JointTable:
    _guard(m.d)
    return JointTable(m.d, joint_table(m))


def interaction_coefficients(t: JointTable) -> np.ndarray:
    """``eta_W`` for every subset ``W`` (indexed by bitmask) with ``ln p(x) = sum_{W subset of x} eta_W``.

    Moebius inversion over the subset lattice; entry 0 is ``ln Pr(all zero)``.
    """
    c = np.log(t.probs).copy()
    n = c.size
    step = 1
    while step < n:
        c = c.reshape(-1, 2, step)
        c[:, 1, :] -= c[:, 0, :]
        step *= 2
    return c.reshape(n)


def table_to_natural(t: JointTable, tree: TreeTopology, tol: float = HIGHER_ORDER_TOL) -> NaturalParamIsing:
    """Natural parameters of a positive table, checked to be an Ising model on ``tree``.

    Raises:
        NotAnIsingModel: some coefficient of a non-edge pair or of a subset
            of three or more vertices exceeds ``tol`` in absolute value.
    """
    if tree.d != t.d:
        raise LengthMismatch(f"tree has {tree.d} vertices, table has {t.d}")
    eta = interaction_coefficients(t)
    masks = np.arange(eta.size)
    order = np.array([bin(k).count("1") for k in range(eta.size)])
    allowed = order <= 1
    edge_masks = [(1 << u) | (1 << v) for u, v in tree.edges]
    allowed[edge_masks] = True
    bad = ~allowed & (np.abs(eta) > tol)
    if bad.any():
        k = int(masks[bad][np.argmax(np.abs(eta[bad]))])
        members = [tree.labels[i] for i in range(t.d) if k >> i & 1]
        raise NotAnIsingModel(f"interaction on {{{', '.join(members)}}} is {eta[k]:.3e}, above {tol:g}")
    return NaturalParamIsing(tree, eta[1 << np.arange(t.d)], eta[edge_masks] if edge_masks else np.zeros(0))


def table_to_mean(t: JointTable, tree: TreeTopology, root: int = 0) -> MeanParamIsing:
    """Marginal means and edge correlations of a table.

    The result reproduces the table only when the table is Markov on
    ``tree``; compose with :func:`table_to_natural` to check that.
    """
    q = t.marginals()
    alpha = []
    for u, v in tree.edges:
        p11 = t.pair(u, v)[1, 1]
        s = np.sqrt(q[u] * q[v] * (1 - q[u]) * (1 - q[v]))
        alpha.append((p11 - q[u] * q[v]) / s)
    return MeanParamIsing.on(tree, q, np.asarray(alpha), root=root)


def mean_to_natural(m: MeanParamIsing) -> NaturalParamIsing:
    return table_to_natural(mean_to_table(m), m.tree)


def natural_to_mean(n: NaturalParamIsing, root: int = 0) -> MeanParamIsing:
    return table_to_mean(n.table(), n.tree, root)


def natural_to_canonical(n: NaturalParamIsing) -> CanonicalParamIsing:
    theta_e = n.eta_edge / 4.0
    theta_v = n.eta_vertex / 2.0 + _neighbour_sum(n.tree, n.eta_edge) / 4.0
    return CanonicalParamIsing(n.tree, theta_v, theta_e)


def canonical_to_natural(c: CanonicalParamIsing) -> NaturalParamIsing:
    eta_e = 4.0 * c.theta_edge
    eta_v = 2.0 * c.theta_vertex - 2.0 * _neighbour_sum(c.tree, c.theta_edge)
    return NaturalParamIsing(c.tree, eta_v, eta_e)


def canonical_to_mean(c: CanonicalParamIsing, root: int = 0) -> MeanParamIsing:
    return table_to_mean(c.table(), c.tree, root)


def centered_to_natural(c: CenteredParamIsing) -> NaturalParamIsing:
    u, v = _edge_cols(c.tree)
    pull = np.zeros(c.d)
    np.add.at(pull, u, c.kappa[v] * c.eta_edge)
    np.add.at(pull, v, c.kappa[u] * c.eta_edge)
    return NaturalParamIsing(c.tree, special.logit(c.kappa) - pull, c.eta_edge)


def natural_to_centered(n: NaturalParamIsing) -> CenteredParamIsing:
    """Solve ``logit(kappa_v) = eta_v + sum_{j ~ v} kappa_j eta_vj`` for ``kappa``.

    Unknowns are ``s = logit(kappa)``, started from ``eta_v``.
    """
    u, v = _edge_cols(n.tree)
    w = n.eta_edge

    def resid(s):
        k = special.expit(s)
        push = np.zeros_like(s)
        np.add.at(push, u, k[v] * w)
        np.add.at(push, v, k[u] * w)
        return s - n.eta_vertex - push

    sol = optimize.root(resid, n.eta_vertex.copy(), method="hybr", tol=1e-14)
    # hybr flags "no further improvement" at machine precision, so judge by the residual
    if np.abs(resid(sol.x)).max() > 1e-10:
        raise ToleranceExceeded(f"centering equations did not converge: {sol.message}")
    kappa = special.expit(sol.x)
    return CenteredParamIsing(n.tree, kappa, w)


PARAMETERIZATIONS = ("natural", "canonical", "centered", "mean")


def kind_of(model) -> str:
    for name, cls in (
        ("natural", NaturalParamIsing),
        ("canonical", CanonicalParamIsing),
        ("centered", CenteredParamIsing),
        ("mean", MeanParamIsing),
    ):
        if isinstance(model, cls):
            return name
    raise TypeError(f"not a tree Ising model: {type(model).__name__}")


def to_natural(model) -> NaturalParamIsing:
    kind = kind_of(model)
    if kind == "natural":
        return model
    if kind == "canonical":
        return canonical_to_natural(model)
    if kind == "centered":
        return centered_to_natural(model)
    return mean_to_natural(model)


def convert(model, to: str, root: int = 0):
    """Convert any supported parameterisation to ``to`` (one of :data:`PARAMETERIZATIONS`)."""
    if to not in PARAMETERIZATIONS:
        raise ValueError(f"unknown parameterization {to!r}; choose from {PARAMETERIZATIONS}")
    if kind_of(model) == to:
        return model
    if to == "mean":
        if kind_of(model) == "canonical":
            return canonical_to_mean(model, root)
        return natural_to_mean(to_natural(model), root)
    nat = to_natural(model)
    if to == "natural":
        return nat
    if to == "canonical":
        return natural_to_canonical(nat)
    return natural_to_centered(nat)


def log_normalizer(model) -> float:
    """``A``, ``Z`` or ``B`` for exponential forms; 0 for the mean form, which needs none."""
    if isinstance(model, MeanParamIsing):
        return 0.0
    return model.norm
