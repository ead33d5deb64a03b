"""Critical-window pipeline: largest component, kernel, ccl bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificate import MinorCertificate
from .graph import MultiGraph, component_excesses, suppress_degree_two, two_core
from .models import sample_gnm, sample_gnp
from .oracle import (
    DEFAULT_EXACT_CAP,
    DEFAULT_RESTARTS,
    edge_upper_bound,
    exact_ccl,
    greedy_minor,
    verify,
)


@dataclass
class PhaseParams:
    """``model='gnm'``: ``m = n/2 + lam n^(2/3)``; ``'gnp'``: ``np = 1 + lam n^(-1/3)``."""

    n: int
    lam: float
    model: str = "gnm"

    def __post_init__(self):
        if self.model not in ("gnm", "gnp"):
            raise ValueError("model must be 'gnm' or 'gnp'")

    @property
    def m(self) -> int:
        return int(round(self.n / 2 + self.lam * self.n ** (2 / 3)))

    @property
    def p(self) -> float:
        return (1 + self.lam * self.n ** (-1 / 3)) / self.n

    @property
    def lambda_p(self) -> float:
        """Window parameter on the G(n,p) scale (``lam_p = 2 lam_bar`` for gnm)."""
        return 2 * self.lam if self.model == "gnm" else self.lam

    @property
    def in_window(self) -> bool:
        """Diagnostic: ``lam`` positive and small against ``n^(1/3)``."""
        return 0 < self.lam <= 0.1 * self.n ** (1 / 3)

    def corollary_ceiling(self, slack: int = 3) -> float:
        """``4 lam_p^(3/2)`` plus the additive slack for the small-component floor."""
        return 4 * max(self.lambda_p, 0.0) ** 1.5 + slack

    def sample(self, src) -> MultiGraph:
        if self.model == "gnm":
            return sample_gnm(self.n, max(self.m, 0), src)
        return sample_gnp(self.n, min(max(self.p, 0.0), 1.0), src)


@dataclass
class KernelExtraction:
    """Kernel of the largest component and the maps lifting it to the host.

    ``vertex_map[i]`` is the host vertex of kernel vertex ``i`` and
    ``edge_paths[j]`` the host vertices subdividing kernel edge ``j``.
    """

    kernel: MultiGraph
    vertex_map: np.ndarray
    edge_paths: list[list[int]]
    component: np.ndarray
    core_vertices: np.ndarray
    cycles: list[list[int]]
    degree_profile: dict[int, int]

    @property
    def order(self) -> int:
        return self.kernel.vertex_count

    @property
    def cubic(self) -> bool:
        return set(self.degree_profile) <= {3}

    def lift(self, cert: MinorCertificate, host: MultiGraph) -> MinorCertificate:
        """Turn a certificate on the kernel into one on ``host``.

        Threads inside a branch set, or between two sets, are absorbed into
        the lower-indexed endpoint set.
        """
        owner = np.full(self.kernel.vertex_count, -1, dtype=np.int64)
        for i, bs in enumerate(cert.branch_sets):
            owner[bs] = i
        sets = [[int(self.vertex_map[v]) for v in bs] for bs in cert.branch_sets]
        for (a, b), inner in zip(self.kernel.edges.tolist(), self.edge_paths):
            oa, ob = owner[a], owner[b]
            if inner and oa >= 0 and ob >= 0:
                sets[min(oa, ob)].extend(inner)
        return with_witnesses(sets, host)


def with_witnesses(sets: list[list[int]], host: MultiGraph) -> MinorCertificate:
    """Certificate with one host edge per pair (first in edge order), if any."""
    owner = np.full(host.vertex_count, -1, dtype=np.int64)
    for i, bs in enumerate(sets):
        owner[bs] = i
    e = host.edges
    ou, ov = owner[e[:, 0]], owner[e[:, 1]]
    cross = np.flatnonzero((ou >= 0) & (ov >= 0) & (ou != ov))
    first: dict[tuple[int, int], tuple[int, int]] = {}
    for idx in cross.tolist():
        a, b = int(ou[idx]), int(ov[idx])
        key = (min(a, b), max(a, b))
        if key not in first:
            u, v = e[idx].tolist()
            first[key] = (u, v)
    h = len(sets)
    witness = [first[(a, b)] for a in range(h) for b in range(a + 1, h) if (a, b) in first]
    if len(witness) != h * (h - 1) // 2:
        witness = []
    return MinorCertificate(branch_sets=[sorted(s) for s in sets], witness_edges=witness)


def extract_kernel(g: MultiGraph) -> KernelExtraction:
    """Largest component -> 2-core -> degree-2 suppression."""
    labels, orders, _, _ = component_excesses(g)
    if g.vertex_count == 0:
        empty = np.zeros(0, dtype=np.int64)
        return KernelExtraction(MultiGraph(0), empty, [], empty, empty, [], {})
    biggest = int(np.argmax(orders))  # lowest label among ties
    comp = np.flatnonzero(labels == biggest)
    sub, sub_map = g.subgraph(comp)
    core, core_map = two_core(sub)
    sup = suppress_degree_two(core)
    to_host = sub_map[core_map]
    vmap = to_host[sup.vertex_map]
    paths = [to_host[p].tolist() if p else [] for p in sup.edge_paths]
    cycles = [to_host[c].tolist() for c in sup.cycles]
    deg = sup.kernel.degrees()
    profile = {int(d): int(c) for d, c in zip(*np.unique(deg, return_counts=True))}
    return KernelExtraction(sup.kernel, vmap, paths, comp, to_host, cycles, profile)


@dataclass
class PhaseReport:
    n: int
    lam: float
    model: str
    edge_count: int
    L1_order: int
    L1_excess: int
    kernel_order: int
    kernel: MultiGraph
    kernel_cubic: bool
    degree_profile: dict[int, int]
    kernel_loops: int
    kernel_parallel: int
    ccl_lower: int
    ccl_lower_method: str
    certificate: MinorCertificate
    verified: bool
    ccl_upper: int
    in_window: bool
    notes: list[str] = field(default_factory=list)


def _vector_edge_bound(e: np.ndarray) -> np.ndarray:
    h = np.floor((1 + np.sqrt(1 + 8 * e.astype(np.float64))) / 2).astype(np.int64)
    h -= h * (h - 1) // 2 > e
    h += (h + 1) * h // 2 <= e
    return np.maximum(h, 1)


def _vector_excess_bound(exc: np.ndarray) -> np.ndarray:
    """Largest ``h`` with ``exc(K_h) <= exc``, per component."""
    return _vector_edge_bound(np.maximum(exc, 0)) + 1


def ccl_upper_bound(g: MultiGraph, ext: KernelExtraction | None = None) -> int:
    """Upper bound on ccl(g) from edge counts and excesses of components.

    A ``K_h`` minor with ``h >= 2`` lives in one component, whose excess is at
    least ``exc(K_h)``. For the largest component the kernel's simple edge
    count also bounds any ``h >= 4``.
    """
    if g.vertex_count == 0:
        return 0
    labels, orders, edges, exc = component_excesses(g)
    per = np.minimum(_vector_edge_bound(edges), _vector_excess_bound(exc))
    per = np.minimum(per, orders)
    if ext is not None and ext.component.size:
        big = labels[ext.component[0]]
        kernel_edges = ext.kernel.simplified().edge_count
        per[big] = min(per[big], max(3, edge_upper_bound(kernel_edges)))
    return int(per.max())


def _cycle_witness(core: MultiGraph, core_map: np.ndarray) -> list[list[int]] | None:
    """Three arcs of one cycle in a graph of minimum degree >= 2."""
    if core.vertex_count < 3:
        return None
    adj = core.adjacency_sets()
    start = 0
    walk, seen = [start], {start: 0}
    prev, cur = -1, start
    while True:
        nxt = next((w for w in sorted(adj[cur]) if w != prev), None)
        if nxt is None:
            return None
        if nxt in seen:
            cyc = walk[seen[nxt]:]
            break
        seen[nxt] = len(walk)
        walk.append(nxt)
        prev, cur = cur, nxt
    if len(cyc) < 3:
        return None
    third = len(cyc) // 3
    arcs = [cyc[:third], cyc[third : 2 * third], cyc[2 * third :]]
    return [[int(core_map[v]) for v in arc] for arc in arcs]


def phase_pipeline(
    params: PhaseParams,
    src,
    cap: int = DEFAULT_EXACT_CAP,
    restarts: int = DEFAULT_RESTARTS,
) -> PhaseReport:
    g = params.sample(src)
    return analyze(g, params, src, cap, restarts)


def analyze(g: MultiGraph, params: PhaseParams, src, cap=DEFAULT_EXACT_CAP, restarts=DEFAULT_RESTARTS) -> PhaseReport:
    ext = extract_kernel(g)
    notes = []
    l1_edges = 0
    if ext.component.size:
        inside = np.zeros(g.vertex_count, dtype=bool)
        inside[ext.component] = True
        l1_edges = int(np.count_nonzero(inside[g.edges[:, 0]] & inside[g.edges[:, 1]]))
    l1_exc = l1_edges - int(ext.component.size) + 1 if ext.component.size else 0
    if not ext.cubic:
        notes.append(f"kernel not 3-regular: degree profile {ext.degree_profile}")

    kern = ext.kernel
    if kern.vertex_count == 0:
        kcert, method = MinorCertificate([]), "exact"
    elif kern.vertex_count <= cap:
        res = exact_ccl(kern, cap=cap)
        kcert, method = res.witness, res.method
    else:
        res = greedy_minor(kern, None, src, restarts=restarts)
        kcert, method = res.witness, res.method
    cert = ext.lift(kcert, g) if kcert.order else MinorCertificate([])

    if cert.order < 3 and ext.core_vertices.size:
        core, _ = g.subgraph(ext.core_vertices)
        arcs = _cycle_witness(core, ext.core_vertices)
        if arcs:
            cert, method = with_witnesses(arcs, g), "cycle"
    if cert.order < 2 and g.edge_count:
        u, v = g.edges[0].tolist()
        if u != v:
            cert, method = with_witnesses([[u], [v]], g), "edge"

    simple = kern.simplified()
    return PhaseReport(
        n=params.n,
        lam=params.lam,
        model=params.model,
        edge_count=g.edge_count,
        L1_order=int(ext.component.size),
        L1_excess=l1_exc,
        kernel_order=ext.order,
        kernel=kern,
        kernel_cubic=ext.cubic,
        degree_profile=ext.degree_profile,
        kernel_loops=kern.loop_count(),
        kernel_parallel=kern.edge_count - kern.loop_count() - simple.edge_count,
        ccl_lower=cert.order,
        ccl_lower_method=method,
        certificate=cert,
        verified=bool(verify(cert, g)),
        ccl_upper=ccl_upper_bound(g, ext),
        in_window=params.in_window,
        notes=notes,
    )
