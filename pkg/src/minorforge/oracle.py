"""Certificate verification, exact Hadwiger numbers for small graphs, bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .certificate import MinorCertificate
from .graph import MultiGraph

DEFAULT_EXACT_CAP = 9
DEFAULT_RESTARTS = 32


class TooLarge(ValueError):
    """Graph exceeds the exhaustive-search vertex cap."""


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str | None = None
    detail: object = None

    def __bool__(self):
        return self.ok


@dataclass
class CclResult:
    value: int
    witness: MinorCertificate
    method: str  # "exact" | "heuristic" | "bound"


def verify(cert: MinorCertificate, host: MultiGraph) -> Verdict:
    """Check a certificate against ``host`` from scratch.

    Failure reasons: ``empty``, ``out_of_range``, ``overlap``,
    ``disconnected`` (detail: set index), ``missing_edge`` (detail: pair),
    ``bad_witness`` (detail: pair).
    """
    n = host.vertex_count
    h = cert.order
    owner = np.full(n, -1, dtype=np.int64)
    for i, bs in enumerate(cert.branch_sets):
        if len(bs) == 0:
            return Verdict(False, "empty", i)
        arr = np.asarray(bs, dtype=np.int64)
        if arr.min() < 0 or arr.max() >= n:
            return Verdict(False, "out_of_range", i)
        if np.unique(arr).size != arr.size or np.any(owner[arr] >= 0):
            return Verdict(False, "overlap", i)
        owner[arr] = i
    if h == 0:
        return Verdict(True)
    e = host.edges
    ou, ov = owner[e[:, 0]], owner[e[:, 1]]
    inner = (ou >= 0) & (ou == ov)
    # each set must form exactly one component of its induced subgraph
    mat = coo_matrix((np.ones(int(inner.sum()), dtype=np.int8), (e[inner, 0], e[inner, 1])), shape=(n, n))
    _, labels = _cc(mat, directed=False)
    members = owner >= 0
    pieces = np.unique(np.stack([owner[members], labels[members]], axis=1), axis=0)
    per_set = np.bincount(pieces[:, 0], minlength=h)
    bad = np.flatnonzero(per_set != 1)
    if bad.size:
        return Verdict(False, "disconnected", int(bad[0]))
    cross = (ou >= 0) & (ov >= 0) & (ou != ov)
    a, b = np.minimum(ou[cross], ov[cross]), np.maximum(ou[cross], ov[cross])
    joined = np.zeros((h, h), dtype=bool)
    joined[a, b] = True
    for x in range(h):
        for y in range(x + 1, h):
            if not joined[x, y]:
                return Verdict(False, "missing_edge", (x, y))
    if cert.witness_edges:
        pairs = cert.pairs()
        if len(cert.witness_edges) != len(pairs):
            return Verdict(False, "bad_witness", None)
        keys = set(map(tuple, np.sort(e, axis=1).tolist()))
        for (x, y), (u, v) in zip(pairs, cert.witness_edges):
            if (min(u, v), max(u, v)) not in keys or {owner[u], owner[v]} != {x, y}:
                return Verdict(False, "bad_witness", (x, y))
    return Verdict(True)


# -- bounds -----------------------------------------------------------------


def edge_upper_bound(g: MultiGraph | int) -> int:
    """Largest ``h`` with ``C(h,2) <= e(g)``; a minor never has more edges."""
    e = g if isinstance(g, int) else g.edge_count
    h = (1 + math.isqrt(1 + 8 * e)) // 2
    while h * (h - 1) // 2 > e:
        h -= 1
    return max(h, 1)


def excess_upper_bound(component_excess: int) -> int:
    """Largest ``h`` allowed by ``h <= 4 sqrt(exc)``, floored at 3.

    ``exc(K_h) >= h^2/16`` for ``h >= 4`` and excess cannot grow under minors.
    """
    if component_excess < 0:
        raise ValueError("excess must be nonnegative")
    return max(3, math.isqrt(16 * component_excess))


def clique_excess(h: int) -> int:
    return h * (h - 1) // 2 - h + 1 if h >= 1 else 0


def monotone_excess_bound(component_excess: int) -> int:
    """Largest ``h`` with ``exc(K_h) <= component_excess``.

    Tighter than :func:`excess_upper_bound` everywhere; a unicyclic component
    gets 3 and a tree 2.
    """
    if component_excess < 0:
        raise ValueError("excess must be nonnegative")
    # exc(K_h) = (h-1)(h-2)/2, so h-1 is the edge bound of the excess
    return edge_upper_bound(component_excess) + 1


# -- exhaustive search --------------------------------------------------------


def _connected_masks(adj: Sequence[set[int]]) -> list[int]:
    """All nonempty vertex subsets (bitmasks) that induce connected subgraphs."""
    n = len(adj)
    nbr = [sum(1 << w for w in adj[v]) for v in range(n)]
    found = set()
    # grow from each minimum vertex, only adding larger vertices
    for v in range(n):
        stack = [1 << v]
        seen = {1 << v}
        while stack:
            s = stack.pop()
            found.add(s)
            frontier = 0
            x = s
            while x:
                low = x & -x
                frontier |= nbr[low.bit_length() - 1]
                x ^= low
            frontier &= ~s & ~((1 << (v + 1)) - 1)
            while frontier:
                low = frontier & -frontier
                frontier ^= low
                t = s | low
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return sorted(found, key=lambda m: (bin(m).count("1"), m))


def _mask_to_list(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def _witness_from_sets(sets: list[list[int]], adj: Sequence[set[int]]) -> MinorCertificate:
    witness = []
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            sb = set(sets[b])
            witness.append(next((u, w) for u in sets[a] for w in adj[u] if w in sb))
    return MinorCertificate(branch_sets=[sorted(s) for s in sets], witness_edges=witness)


def exact_ccl(g: MultiGraph, cap: int = DEFAULT_EXACT_CAP) -> CclResult:
    """Exact contraction clique number by exhaustive branch-set search.

    Branch sets range over connected vertex subsets; the search picks a
    pairwise disjoint, pairwise adjacent family of maximum size, in increasing
    subset index order so each family is visited once. It stops early when the
    edge bound is met.
    """
    n = g.vertex_count
    if n > cap:
        raise TooLarge(f"{n} vertices exceeds exact cap {cap}")
    if n == 0:
        return CclResult(0, MinorCertificate([]), "exact")
    adj = g.adjacency_sets()
    simple_edges = sum(len(a) for a in adj) // 2
    ceiling = min(n, edge_upper_bound(simple_edges))
    masks = _connected_masks(adj)
    nbr = [sum(1 << w for w in adj[v]) for v in range(n)]
    halo = []
    for s in masks:
        x, acc = s, 0
        while x:
            low = x & -x
            acc |= nbr[low.bit_length() - 1]
            x ^= low
        halo.append(acc & ~s)
    count = len(masks)
    # compat[i]: later subsets disjoint from and adjacent to subset i
    compat = [0] * count
    for i in range(count):
        si, hi = masks[i], halo[i]
        bits = 0
        for j in range(i + 1, count):
            if not (masks[j] & si) and (masks[j] & hi):
                bits |= 1 << j
        compat[i] = bits

    best: list[int] = [0]
    best_family: list[int] = []

    def search(chosen: list[int], cand: int, used: int) -> bool:
        if len(chosen) > best[0]:
            best[0] = len(chosen)
            best_family[:] = chosen
            if best[0] >= ceiling:
                return True
        # vertices left for new sets bound the number of further sets
        room = n - bin(used).count("1")
        if len(chosen) + min(bin(cand).count("1"), room) <= best[0]:
            return False
        while cand:
            low = cand & -cand
            j = low.bit_length() - 1
            cand ^= low
            if len(chosen) + 1 + min(bin(cand).count("1"), room - 1) <= best[0]:
                return False
            if masks[j] & used:
                continue
            chosen.append(j)
            if search(chosen, cand & compat[j], used | masks[j]):
                return True
            chosen.pop()
        return False

    search([], (1 << count) - 1, 0)
    sets = [_mask_to_list(masks[j]) for j in best_family]
    return CclResult(best[0], _witness_from_sets(sets, adj), "exact")


# -- heuristic ----------------------------------------------------------------


def _voronoi_regions(adj: Sequence[set[int]], seeds: list[int], rng: np.random.Generator) -> list[int]:
    """Grow connected regions from ``seeds`` in random round-robin order."""
    n = len(adj)
    owner = [-1] * n
    frontiers: list[list[int]] = []
    for i, s in enumerate(seeds):
        owner[s] = i
        frontiers.append([s])
    active = list(range(len(seeds)))
    while active:
        nxt_active = []
        for i in rng.permutation(active).tolist():
            grown = []
            for v in frontiers[i]:
                for w in adj[v]:
                    if owner[w] < 0:
                        owner[w] = i
                        grown.append(w)
            if grown:
                frontiers[i] = grown
                nxt_active.append(i)
        active = nxt_active
    return owner


def _best_clique_model(adj, owner, h) -> list[list[int]]:
    regions: list[list[int]] = [[] for _ in range(h)]
    for v, o in enumerate(owner):
        if o >= 0:
            regions[o].append(v)
    rg = nx.Graph()
    rg.add_nodes_from(range(h))
    for v, o in enumerate(owner):
        if o < 0:
            continue
        for w in adj[v]:
            if owner[w] >= 0 and owner[w] != o:
                rg.add_edge(o, owner[w])
    clique, _ = nx.max_weight_clique(rg, weight=None)
    return [regions[i] for i in sorted(clique)]


def greedy_minor(
    g: MultiGraph,
    target_order: int | None,
    src,
    restarts: int = DEFAULT_RESTARTS,
) -> CclResult:
    """Randomized lower-bound witness.

    Each restart seeds ``h`` regions at random vertices, grows them into a
    partition of connected regions, and keeps the largest clique of the
    region-adjacency graph. ``h`` is ``target_order`` when given, otherwise it
    cycles through values up to ``2 sqrt(e)``.
    """
    rng = src if isinstance(src, np.random.Generator) else src.rng
    n = g.vertex_count
    adj = g.adjacency_sets()
    if n == 0:
        return CclResult(0, MinorCertificate([]), "heuristic")
    simple_edges = sum(len(a) for a in adj) // 2
    ceiling = min(n, edge_upper_bound(simple_edges))
    if target_order:
        hs = [min(target_order, n)] * restarts
    else:
        top = min(n, max(2, int(2 * math.sqrt(simple_edges)) + 1))
        hs = [int(x) for x in np.linspace(2, top, num=restarts)]
        hs[-1] = top
    best: list[list[int]] = [[0]]
    if n <= 60:
        # every vertex its own region: the clique number of g itself
        best = max(best, _best_clique_model(adj, list(range(n)), n), key=len)
    for h in hs:
        if len(best) >= ceiling:
            break
        seeds = rng.choice(n, size=h, replace=False).tolist()
        owner = _voronoi_regions(adj, seeds, rng)
        model = _best_clique_model(adj, owner, h)
        if len(model) > len(best):
            best = model
    return CclResult(len(best), _witness_from_sets(best, adj), "heuristic")
