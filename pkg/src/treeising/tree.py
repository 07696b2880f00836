"""Undirected trees, rooted views and weighted adjacency matrices.

Vertices are dense 0-based integers internally; a label table maps them back
to whatever names the caller used (model files use string labels).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CycleDetected,
    Disconnected,
    DuplicateEdge,
    IndexOutOfRange,
    MissingEdgeWeight,
    NotAnEdge,
    SelfLoop,
    TreeError,
)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class TreeTopology:
    """A validated undirected tree on vertices ``0..d-1``.

    Build instances with :func:`build_tree`; the constructor does not validate.
    ``edges`` holds normalised pairs ``(u, v)`` with ``u < v`` in input order.
    """

    d: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    _adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    _edge_index: Mapping[tuple[int, int], int] = field(repr=False, compare=False)

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self._adjacency[v]

    def edge_index(self, u: int, v: int) -> int:
        try:
            return self._edge_index[_edge_key(u, v)]
        except KeyError:
            raise NotAnEdge(f"({self.labels[u]}, {self.labels[v]}) is not an edge") from None

    def has_edge(self, u: int, v: int) -> bool:
        return _edge_key(u, v) in self._edge_index

    def index_of(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise IndexOutOfRange(f"unknown vertex label {label!r}") from None

    def _check_vertex(self, v: int) -> None:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.d):
            raise IndexOutOfRange(f"vertex {v!r} not in [0, {self.d})")

    def root_at(self, r: int) -> "RootedTree":
        return root_at(self, r)


def build_tree(d: int, edges: Sequence[tuple[int, int]], labels: Sequence[str] | None = None) -> TreeTopology:
    """Validate ``edges`` as a spanning tree on ``d`` vertices.

    Raises the specific :class:`~treeising.errors.TreeError` subclass naming
    the first offending edge.
    """
    if d < 1:
        raise TreeError(f"a tree needs at least one vertex, got d={d}")
    if labels is None:
        labels = [str(i) for i in range(d)]
    labels = tuple(str(x) for x in labels)
    if len(labels) != d:
        raise TreeError(f"{len(labels)} labels given for {d} vertices")
    if len(set(labels)) != d:
        raise TreeError("vertex labels must be unique")

    # union-find with path halving
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    seen = {}
    norm = []
    for u, v in edges:
        for w in (u, v):
            if not (isinstance(w, (int, np.integer)) and 0 <= w < d):
                raise IndexOutOfRange(f"edge ({u}, {v}): vertex {w!r} not in [0, {d})")
        u, v = int(u), int(v)
        if u == v:
            raise SelfLoop(f"self-loop on vertex {labels[u]}")
        key = _edge_key(u, v)
        if key in seen:
            raise DuplicateEdge(f"duplicate edge ({labels[u]}, {labels[v]})")
        ru, rv = find(u), find(v)
        if ru == rv:
            raise CycleDetected(f"edge ({labels[u]}, {labels[v]}) closes a cycle")
        parent[ru] = rv
        seen[key] = len(norm)
        norm.append(key)
    if len(norm) != d - 1:
        comps = sorted({labels[find(x)] for x in range(d)})
        raise Disconnected(f"{len(norm)} edges for {d} vertices; {len(comps)} components")

    adj = [[] for _ in range(d)]
    for u, v in norm:
        adj[u].append(v)
        adj[v].append(u)
    return TreeTopology(
        d=d,
        edges=tuple(norm),
        labels=labels,
        _adjacency=tuple(tuple(sorted(a)) for a in adj),
        _edge_index=seen,
    )


def tree_from_labels(vertices: Sequence, edges: Sequence[tuple]) -> TreeTopology:
    """Build a tree from arbitrary vertex labels (compared as strings)."""
    labels = [str(v) for v in vertices]
    index = {}
    for i, lab in enumerate(labels):
        if lab in index:
            raise TreeError(f"duplicate vertex label {lab!r}")
        index[lab] = i
    pairs = []
    for e in edges:
        a, b = str(e[0]), str(e[1])
        for lab in (a, b):
            if lab not in index:
                raise IndexOutOfRange(f"edge ({a}, {b}): unknown vertex {lab!r}")
        pairs.append((index[a], index[b]))
    return build_tree(len(labels), pairs, labels)


@dataclass(frozen=True)
class RootedTree:
    """Breadth-first rooted view of a :class:`TreeTopology`.

    ``order`` starts at the root and visits children in ascending index order,
    so every parent precedes its children. ``parent[root] == -1``.
    """

    topology: TreeTopology
    root: int
    order: tuple[int, ...]
    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return self.topology.d

    @property
    def position(self) -> np.ndarray:
        pos = np.empty(self.d, dtype=np.int64)
        pos[list(self.order)] = np.arange(self.d)
        return pos

    def parent_of(self, v: int) -> int | None:
        self.topology._check_vertex(v)
        p = self.parent[v]
        return None if p < 0 else p

    def depth(self) -> np.ndarray:
        depth = np.zeros(self.d, dtype=np.int64)
        for v in self.order[1:]:
            depth[v] = depth[self.parent[v]] + 1
        return depth

    def reroot(self, r: int) -> "RootedTree":
        return root_at(self.topology, r)


def root_at(t: TreeTopology, r: int) -> RootedTree:
    t._check_vertex(r)
    r = int(r)
    parent = [-1] * t.d
    children = [[] for _ in range(t.d)]
    order = [r]
    visited = [False] * t.d
    visited[r] = True
    queue = deque([r])
    while queue:
        u = queue.popleft()
        for w in t._adjacency[u]:  # already ascending
            if not visited[w]:
                visited[w] = True
                parent[w] = u
                children[u].append(w)
                order.append(w)
                queue.append(w)
    return RootedTree(
        topology=t,
        root=r,
        order=tuple(order),
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
    )


def path(t: TreeTopology, u: int, v: int) -> list[tuple[int, int]]:
    """Edges walked from ``u`` to ``v``, each oriented along the walk."""
    t._check_vertex(u)
    t._check_vertex(v)
    if u == v:
        return []
    rt = root_at(t, u)
    walk = []
    w = v
    while w != u:
        p = rt.parent[w]
        walk.append((p, w))
        w = p
    walk.reverse()
    return walk


def _alpha_lookup(t: TreeTopology, alpha) -> np.ndarray:
    """Normalise edge weights into an array aligned with ``t.edges``."""
    if isinstance(alpha, Mapping):
        out = np.empty(len(t.edges))
        norm = {}
        for (a, b), w in alpha.items():
            norm[_edge_key(int(a), int(b))] = float(w)
        for i, e in enumerate(t.edges):
            if e not in norm:
                raise MissingEdgeWeight(f"no weight for edge ({t.labels[e[0]]}, {t.labels[e[1]]})")
            out[i] = norm[e]
        return out
    if np.isscalar(alpha):
        return np.full(len(t.edges), float(alpha))
    arr = np.asarray(alpha, dtype=float)
    if arr.shape != (len(t.edges),):
        raise MissingEdgeWeight(f"expected {len(t.edges)} edge weights, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class WeightedAdjacency:
    """Symmetric matrix in the topological order ``order`` of a rooted tree.

    ``matrix[i, j]`` is the weight of the edge between ``order[i]`` and
    ``order[j]``, ``1`` on the diagonal and ``0`` elsewhere.
    """

    matrix: np.ndarray
    order: tuple[int, ...]

    def parents(self) -> np.ndarray:
        """Row index of each column's parent (``-1`` for the root column).

        Uses only the matrix: the first nonzero off-diagonal entry above the
        diagonal in column ``j``.
        """
        d = self.matrix.shape[0]
        out = np.full(d, -1, dtype=np.int64)
        for j in range(1, d):
            nz = np.flatnonzero(self.matrix[:j, j])
            out[j] = nz[0]
        return out


def weighted_adjacency(rt: RootedTree, alpha) -> WeightedAdjacency:
    t = rt.topology
    w = _alpha_lookup(t, alpha)
    pos = rt.position
    A = np.eye(t.d)
    for (u, v), a in zip(t.edges, w):
        i, j = pos[u], pos[v]
        A[i, j] = A[j, i] = a
    return WeightedAdjacency(matrix=A, order=rt.order)


def binary_tree(depth: int = 2) -> TreeTopology:
    """Complete binary tree labelled ``1..2**(depth+1)-1`` in heap order."""
    d = 2 ** (depth + 1) - 1
    edges = [(i, 2 * i + 1) for i in range(d) if 2 * i + 1 < d]
    edges += [(i, 2 * i + 2) for i in range(d) if 2 * i + 2 < d]
    edges.sort()
    return build_tree(d, edges, [str(i + 1) for i in range(d)])


def chain(d: int) -> TreeTopology:
    return build_tree(d, [(i, i + 1) for i in range(d - 1)])


def random_tree(d: int, rng: np.random.Generator) -> TreeTopology:
    """Uniform random labelled tree via a random Prüfer sequence."""
    if d == 1:
        return build_tree(1, [])
    if d == 2:
        return build_tree(2, [(0, 1)])
    seq = rng.integers(0, d, size=d - 2)
    degree = np.ones(d, dtype=np.int64)
    np.add.at(degree, seq, 1)
    edges = []
    for s in seq:
        leaf = int(np.flatnonzero(degree == 1)[0])
        edges.append((leaf, int(s)))
        degree[leaf] -= 1
        degree[s] -= 1
    u, v = np.flatnonzero(degree == 1)
    edges.append((int(u), int(v)))
    return build_tree(d, edges)
