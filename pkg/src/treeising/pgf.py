"""Joint probability generating function of a mean-parameterised tree Ising model.

Conditioning on the root and recursing towards the leaves, every non-root
vertex ``v`` contributes two conditional generating functions of its subtree,

    zeta_v = E[prod t^J over v's subtree | J_pa(v) = 0]
    xi_v   = E[prod t^J over v's subtree | J_pa(v) = 1]

which satisfy

    zeta_v = Pr(0|0) * prod_children zeta + Pr(1|0) * t_v * prod_children xi
    xi_v   = Pr(0|1) * prod_children zeta + Pr(1|1) * t_v * prod_children xi

and the pgf is ``(1 - q_r) prod zeta + q_r t_r prod xi`` over the root's
children. One leaf-to-root pass costs O(d) per evaluation point.

The heavy lifting is done by a compiled kernel when the extension is built,
with a numpy fallback otherwise. Set ``TREEISING_BACKEND=python`` to force
the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _fallback
from .model import MeanParamIsing
from .tree import RootedTree

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _default_backend():
    forced = os.environ.get("TREEISING_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(f"TREEISING_BACKEND={forced!r} unavailable; have {available_backends()}")
        return _BACKENDS[forced]
    return _compiled if _compiled is not None else _fallback


_backend = _default_backend()
BACKEND = _backend.BACKEND


def get_backend(name: str | None = None):
    if name is None:
        return _backend
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}") from None


@dataclass(frozen=True, eq=False)
class Schedule:
    """Post-order traversal of a rooted tree, heaviest child first.

    ``steps[s]`` is the vertex handled at step ``s``; the root comes last.
    ``first[s]`` marks a vertex that is the first of its siblings to finish:
    it opens its parent's accumulator instead of multiplying into it. With
    heavy-first ordering at most ``log2(d) + 1`` accumulators are ever open.
    """

    steps: np.ndarray
    nchild: np.ndarray
    first: np.ndarray
    stack_size: int

    @property
    def position(self) -> np.ndarray:
        pos = np.empty(self.steps.size, dtype=np.int64)
        pos[self.steps] = np.arange(self.steps.size)
        return pos


def build_schedule(rt: RootedTree) -> Schedule:
    d = rt.d
    size = np.ones(d, dtype=np.int64)
    for v in reversed(rt.order[1:]):
        size[rt.parent[v]] += size[v]
    kids = [sorted(rt.children[v], key=lambda c: (-size[c], c)) for v in range(d)]

    steps = []
    first = np.zeros(d, dtype=np.int8)
    stack = [(rt.root, 0)]
    while stack:
        v, i = stack.pop()
        if i < len(kids[v]):
            stack.append((v, i + 1))
            stack.append((kids[v][i], 0))
        else:
            steps.append(v)
    for v in range(d):
        if kids[v]:
            first[kids[v][0]] = 1

    steps = np.asarray(steps, dtype=np.int64)
    nchild = np.array([len(kids[v]) for v in steps], dtype=np.int32)
    first = first[steps]
    height = peak = 0
    for s in range(d - 1):
        if nchild[s]:
            height -= 1
        if first[s]:
            height += 1
            peak = max(peak, height)
    return Schedule(steps=steps, nchild=nchild, first=first, stack_size=max(peak, 1))


@dataclass(frozen=True, eq=False)
class PgfPlan:
    """A :class:`Schedule` plus the model's conditional probabilities in step order."""

    schedule: Schedule
    c00: np.ndarray
    c01: np.ndarray
    c10: np.ndarray
    c11: np.ndarray
    q_root: float


def plan(m: MeanParamIsing) -> PgfPlan:
    cached = m.__dict__.get("_pgf_plan")
    if cached is not None:
        return cached
    sch = build_schedule(m.rt)
    T = m.transition_tables()[sch.steps]
    p = PgfPlan(
        schedule=sch,
        c00=np.ascontiguousarray(T[:, 0, 0]),
        c01=np.ascontiguousarray(T[:, 0, 1]),
        c10=np.ascontiguousarray(T[:, 1, 0]),
        c11=np.ascontiguousarray(T[:, 1, 1]),
        q_root=float(m.q[m.rt.root]),
    )
    object.__setattr__(m, "_pgf_plan", p)
    return p


def _evaluate(m: MeanParamIsing, T: np.ndarray, root_only: bool, backend) -> np.ndarray:
    p = plan(m)
    sch = p.schedule
    return get_backend(backend).ising_pgf(
        np.ascontiguousarray(T, dtype=np.complex128),
        sch.nchild,
        sch.first,
        p.c00,
        p.c01,
        p.c10,
        p.c11,
        p.q_root,
        bool(root_only),
        sch.stack_size,
    )


def _scalar_or_array(values, shape):
    out = values.reshape(shape)
    return complex(out) if out.ndim == 0 else out


def joint_pgf(m: MeanParamIsing, t, root_only: bool = False, backend: str | None = None):
    """``E[prod_v t_v^{J_v}]`` at a vector ``t`` of length ``d`` or each row of an ``(n, d)`` array.

    ``t`` may be real or complex. With ``root_only`` only the ``J_root = 1``
    branch is returned, i.e. ``E[J_r prod_v t_v^{J_v}]``.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.shape[-1:] != (m.d,):
        from .errors import LengthMismatch

        raise LengthMismatch(f"t has trailing length {t.shape[-1:] or 0}, expected {m.d}")
    lead = t.shape[:-1]
    T = t.reshape(-1, m.d)[:, plan(m).schedule.steps]
    return _scalar_or_array(_evaluate(m, T, root_only, backend), lead)


def sum_pgf(m: MeanParamIsing, t, backend: str | None = None):
    """Pgf of ``K = sum_v J_v`` at a scalar or at each entry of an array."""
    t = np.asarray(t, dtype=np.complex128)
    vals = _evaluate(m, t.reshape(-1, 1), False, backend)
    return _scalar_or_array(vals, t.shape)


def ogfea_pgf(m: MeanParamIsing, v: int, t, backend: str | None = None):
    """Generating function ``sum_k t^k E[J_v 1{K = k}]`` of the expected allocations to ``v``.

    Re-roots the model at ``v``; the allocation generating function is then
    the ``J_v = 1`` branch of the pgf at ``t * 1``.
    """
    mv = m.reroot(v)
    t = np.asarray(t, dtype=np.complex128)
    vals = _evaluate(mv, t.reshape(-1, 1), True, backend)
    return _scalar_or_array(vals, t.shape)
