"""Regression sweep over small graphs for the exact and heuristic oracles."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .graph import MultiGraph, complete_graph, is_connected_subset
from .models import RandomSource
from .oracle import (
    clique_excess,
    edge_upper_bound,
    exact_ccl,
    excess_upper_bound,
    greedy_minor,
    monotone_excess_bound,
    verify,
)

ATLAS_MAX = 7


@dataclass
class OracleReport:
    graphs_checked: int = 0
    trees_checked: int = 0
    random_checked: int = 0
    violations: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"checked atlas={self.graphs_checked} trees={self.trees_checked} "
            f"random={self.random_checked} violations={len(self.violations)}"
        )


def connected_atlas(max_n: int):
    """Every connected graph with 1..max_n vertices (max_n <= 7), up to isomorphism."""
    for g in nx.graph_atlas_g():
        if 0 < g.number_of_nodes() <= max_n and nx.is_connected(g):
            yield MultiGraph(g.number_of_nodes(), list(g.edges()))


def random_connected_graph(n: int, rng: np.random.Generator) -> MultiGraph:
    """Random spanning tree plus a random number of extra edges."""
    order = rng.permutation(n).tolist()
    edges = {tuple(sorted((order[i], order[int(rng.integers(i))]))) for i in range(1, n)}
    extra = int(rng.integers(0, n * (n - 1) // 2 - len(edges) + 1))
    others = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
    for j in rng.permutation(len(others))[:extra].tolist():
        edges.add(others[j])
    return MultiGraph(n, sorted(edges))


def check_graph(g: MultiGraph, rng, report: OracleReport, restarts: int = 8) -> int:
    res = exact_ccl(g)
    label = g.to_text().replace("\n", ";")
    if not verify(res.witness, g):
        report.violations.append(f"exact witness fails verify: {label}")
    if res.value > edge_upper_bound(g):
        report.violations.append(f"exact above edge bound: {label}")
    exc = g.edge_count - g.vertex_count + 1
    if clique_excess(res.value) > exc:
        report.violations.append(f"excess monotonicity broken: {label}")
    if res.value > monotone_excess_bound(exc):
        report.violations.append(f"exact above excess clique bound: {label}")
    if res.value >= 4 and res.value > excess_upper_bound(exc):
        report.violations.append(f"exact above excess bound: {label}")
    heur = greedy_minor(g, None, rng, restarts=restarts)
    if not verify(heur.witness, g) or heur.value > res.value:
        report.violations.append(f"greedy {heur.value} vs exact {res.value}: {label}")
    return res.value


def run_oracle_checks(max_n: int, samples: int, seed: int) -> OracleReport:
    rng = RandomSource(seed, 0).rng
    report = OracleReport()
    for g in connected_atlas(min(max_n, ATLAS_MAX)):
        value = check_graph(g, rng, report)
        report.graphs_checked += 1
        if g.vertex_count >= 2 and g.edge_count == g.vertex_count - 1:
            report.trees_checked += 1
            if value != 2:
                report.violations.append(f"tree with ccl {value}: {g.to_text()!r}")
    kn = exact_ccl(complete_graph(max_n)).value
    if kn != max_n:
        report.violations.append(f"ccl(K_{max_n}) = {kn}")
    for _ in range(samples):
        n = int(rng.integers(2, max_n + 1))
        g = random_connected_graph(n, rng)
        assert is_connected_subset(g, range(n))
        check_graph(g, rng, report)
        report.random_checked += 1
    return report
