"""Multigraph carrier and the elementary algorithms the pipeline needs.

Edges keep stable indices so parallel edges stay distinguishable. A loop
``(v, v)`` contributes 2 to ``degree(v)`` but counts once in ``edge_count``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc


class MultiGraph:
    """Immutable undirected multigraph on vertices ``0..vertex_count-1``."""

    __slots__ = ("vertex_count", "edges", "_indptr", "_nbr", "_eid")

    def __init__(self, vertex_count: int, edges=()):
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be a sequence of vertex pairs")
        if vertex_count < 0:
            raise ValueError("vertex_count must be nonnegative")
        if arr.size and (arr.min() < 0 or arr.max() >= vertex_count):
            raise ValueError("edge endpoint out of range")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.vertex_count = int(vertex_count)
        self.edges = arr
        self._indptr = None
        self._nbr = None
        self._eid = None

    # -- basic queries -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def __repr__(self):
        return f"MultiGraph(n={self.vertex_count}, m={self.edge_count})"

    def __eq__(self, other):
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.vertex_count, self.edges.tobytes()))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.vertex_count)

    def degree(self, v: int) -> int:
        return int(self.degrees()[v])

    def _build_adjacency(self):
        n = self.vertex_count
        m = self.edge_count
        u, v = self.edges[:, 0], self.edges[:, 1]
        # each edge appears once per endpoint slot; a loop yields two slots at v
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.argsort(src, kind="stable")
        self._nbr = dst[order]
        self._eid = eid[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._indptr[1:])

    def incident(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbour and edge-id arrays of the edge slots at ``v``."""
        if self._indptr is None:
            self._build_adjacency()
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return self._nbr[lo:hi], self._eid[lo:hi]

    def neighbors(self, v: int) -> np.ndarray:
        return self.incident(v)[0]

    def adjacency_sets(self) -> list[set[int]]:
        """Simple adjacency (loops dropped, parallel edges collapsed)."""
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for a, b in self.edges.tolist():
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
        return adj

    def is_simple(self) -> bool:
        if self.edge_count == 0:
            return True
        u, v = self.edges[:, 0], self.edges[:, 1]
        if np.any(u == v):
            return False
        key = np.minimum(u, v) * self.vertex_count + np.maximum(u, v)
        return np.unique(key).size == key.size

    def loop_count(self) -> int:
        return int(np.count_nonzero(self.edges[:, 0] == self.edges[:, 1]))

    def simplified(self) -> "MultiGraph":
        """Drop loops and collapse parallel edges (sorted edge order)."""
        e = self.edges[self.edges[:, 0] != self.edges[:, 1]]
        if e.size == 0:
            return MultiGraph(self.vertex_count)
        e = np.sort(e, axis=1)
        return MultiGraph(self.vertex_count, np.unique(e, axis=0))

    def subgraph(self, vertices: Iterable[int]) -> tuple["MultiGraph", np.ndarray]:
        """Induced subgraph, relabelled ``0..len-1`` in sorted order.

        Returns the subgraph and the array mapping new labels to old ones.
        """
        keep = np.unique(np.fromiter(vertices, dtype=np.int64))
        index = np.full(self.vertex_count, -1, dtype=np.int64)
        index[keep] = np.arange(keep.size)
        mask = (index[self.edges[:, 0]] >= 0) & (index[self.edges[:, 1]] >= 0)
        return MultiGraph(keep.size, index[self.edges[mask]]), keep

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{self.vertex_count} {self.edge_count}"]
        lines.extend(f"{a} {b}" for a, b in self.edges.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MultiGraph":
        rows = text.split("\n")
        n, m = (int(x) for x in rows[0].split())
        edges = [tuple(int(x) for x in row.split()) for row in rows[1 : m + 1]]
        if len(edges) != m:
            raise ValueError(f"expected {m} edge lines, found {len(edges)}")
        return cls(n, edges)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def read(cls, path) -> "MultiGraph":
        with open(path) as fh:
            return cls.from_text(fh.read())


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def path_graph(n: int) -> MultiGraph:
    return MultiGraph(n, [(a, a + 1) for a in range(n - 1)])


def cycle_graph(n: int) -> MultiGraph:
    return MultiGraph(n, [(a, (a + 1) % n) for a in range(n)])


def subdivide(g: MultiGraph, edge_ids: Sequence[int] | None = None) -> MultiGraph:
    """Subdivide the chosen edges (default: all) once each."""
    chosen = set(range(g.edge_count) if edge_ids is None else edge_ids)
    n = g.vertex_count
    out = []
    for i, (a, b) in enumerate(g.edges.tolist()):
        if i in chosen:
            out.append((a, n))
            out.append((n, b))
            n += 1
        else:
            out.append((a, b))
    return MultiGraph(n, out)


# -- components and excess ---------------------------------------------


def component_labels(g: MultiGraph) -> tuple[int, np.ndarray]:
    """Number of components and a per-vertex component label."""
    n = g.vertex_count
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    e = g.edges
    mat = coo_matrix((np.ones(e.shape[0], dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
    count, labels = _cc(mat, directed=False)
    return int(count), labels.astype(np.int64)


def connected_components(g: MultiGraph) -> list[set[int]]:
    """Vertex sets of the connected components, ordered by smallest vertex."""
    count, labels = component_labels(g)
    groups: list[list[int]] = [[] for _ in range(count)]
    for v, c in enumerate(labels.tolist()):
        groups[c].append(v)
    groups.sort(key=lambda grp: grp[0])
    return [set(grp) for grp in groups]


def is_connected_subset(adj: Sequence[set[int]] | MultiGraph, vertices: Iterable[int]) -> bool:
    """Whether ``vertices`` induces a connected subgraph (empty set: False)."""
    verts = set(vertices)
    if not verts:
        return False
    if isinstance(adj, MultiGraph):
        nbrs = lambda v: adj.neighbors(v).tolist()  # noqa: E731
    else:
        nbrs = lambda v: adj[v]  # noqa: E731
    start = next(iter(verts))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in nbrs(v):
            if w in verts and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(verts)


@dataclass(frozen=True)
class ExcessReport:
    component_id: int
    order: int
    edge_count: int
    excess: int


def excess(g: MultiGraph, component: Iterable[int], component_id: int = 0) -> ExcessReport:
    """Cyclomatic number ``e - |V| + 1`` of a connected vertex set."""
    comp = set(component)
    if not is_connected_subset(g, comp):
        raise ValueError("excess is defined for a connected vertex set")
    inside = np.zeros(g.vertex_count, dtype=bool)
    inside[list(comp)] = True
    e = g.edges
    m = int(np.count_nonzero(inside[e[:, 0]] & inside[e[:, 1]]))
    return ExcessReport(component_id, len(comp), m, m - len(comp) + 1)


def component_excesses(g: MultiGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised per-component (labels, orders, edge counts, excesses)."""
    count, labels = component_labels(g)
    orders = np.bincount(labels, minlength=count)
    edges = np.bincount(labels[g.edges[:, 0]], minlength=count) if g.edge_count else np.zeros(count, dtype=np.int64)
    return labels, orders, edges, edges - orders + 1


# -- 2-core and degree-2 suppression ------------------------------------


def two_core(g: MultiGraph) -> tuple[MultiGraph, np.ndarray]:
    """Peel vertices of degree <= 1 until none remain.

    Returns the core (relabelled) and the new-to-old vertex map.
    """
    deg = g.degrees().copy()
    alive = np.ones(g.vertex_count, dtype=bool)
    queue = deque(np.flatnonzero(deg <= 1).tolist())
    while queue:
        v = queue.popleft()
        if not alive[v]:
            continue
        alive[v] = False
        for w in g.neighbors(v).tolist():
            if alive[w]:
                deg[w] -= 1
                if deg[w] == 1:
                    queue.append(w)
    return g.subgraph(np.flatnonzero(alive))


@dataclass
class Suppression:
    """Kernel produced by :func:`suppress_degree_two` plus lifting data.

    ``vertex_map[i]`` is the source vertex of kernel vertex ``i``;
    ``edge_paths[j]`` lists the internal (degree-2) source vertices of kernel
    edge ``j`` in order from its first to its second endpoint.
    """

    kernel: MultiGraph
    vertex_map: np.ndarray
    edge_paths: list[list[int]]
    cycles: list[list[int]] = field(default_factory=list)


def suppress_degree_two(g: MultiGraph) -> Suppression:
    """Replace maximal degree-2 threads by single edges.

    Expects minimum degree >= 2. Components that are bare cycles of
    degree-2 vertices are dropped and returned in ``cycles``.
    """
    deg = g.degrees()
    if g.vertex_count and deg.min() < 2:
        raise ValueError("suppress_degree_two expects minimum degree >= 2")
    branch = np.flatnonzero(deg >= 3)
    index = np.full(g.vertex_count, -1, dtype=np.int64)
    index[branch] = np.arange(branch.size)
    used = np.zeros(g.edge_count, dtype=bool)
    k_edges: list[tuple[int, int]] = []
    paths: list[list[int]] = []
    for root in branch.tolist():
        nbrs, eids = g.incident(root)
        for w, e in zip(nbrs.tolist(), eids.tolist()):
            if used[e]:
                continue
            used[e] = True
            inner = []
            prev_e, cur = e, w
            while index[cur] < 0:
                inner.append(cur)
                cn, ce = g.incident(cur)
                # the other slot of a degree-2 vertex
                nxt = [(x, f) for x, f in zip(cn.tolist(), ce.tolist()) if f != prev_e]
                cur_next, f = nxt[0]
                used[f] = True
                prev_e, cur = f, cur_next
            k_edges.append((int(index[root]), int(index[cur])))
            paths.append(inner)
    cycles: list[list[int]] = []
    for e in np.flatnonzero(~used).tolist():
        if used[e]:
            continue
        a, b = g.edges[e].tolist()
        used[e] = True
        cyc = [a]
        prev_e, cur = e, b
        while cur != a:
            cyc.append(cur)
            cn, ce = g.incident(cur)
            cur_next, f = next((x, f) for x, f in zip(cn.tolist(), ce.tolist()) if f != prev_e)
            used[f] = True
            prev_e, cur = f, cur_next
        cycles.append(cyc)
    return Suppression(MultiGraph(branch.size, k_edges), branch, paths, cycles)
