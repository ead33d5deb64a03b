"""Maximum-cardinality bipartite matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching


@dataclass
class BipartiteGraph:
    """Left vertices ``0..left_count-1``, each with a list of right indices."""

    left_count: int
    right_count: int
    adjacency: list[list[int]]

    def __post_init__(self):
        if len(self.adjacency) != self.left_count:
            raise ValueError("adjacency needs one list per left vertex")
        for row in self.adjacency:
            if len(set(row)) != len(row):
                raise ValueError("adjacency lists must be duplicate-free")
            if any(not 0 <= r < self.right_count for r in row):
                raise ValueError("right index out of range")

    @classmethod
    def from_edges(cls, left_count: int, right_count: int, edges: Sequence[tuple[int, int]]):
        adj: list[list[int]] = [[] for _ in range(left_count)]
        seen = set()
        for a, b in edges:
            if (a, b) not in seen:
                seen.add((a, b))
                adj[a].append(b)
        return cls(left_count, right_count, adj)

    @property
    def edge_count(self) -> int:
        return sum(len(row) for row in self.adjacency)

    def to_csr(self) -> csr_matrix:
        indptr = np.zeros(self.left_count + 1, dtype=np.int64)
        np.cumsum([len(row) for row in self.adjacency], out=indptr[1:])
        indices = np.fromiter((r for row in self.adjacency for r in row), dtype=np.int64, count=int(indptr[-1]))
        data = np.ones(indices.size, dtype=np.int8)
        return csr_matrix((data, indices, indptr), shape=(self.left_count, self.right_count))


@dataclass
class Matching:
    """Partial injection from left to right vertices."""

    pairs: dict[int, int]

    def __len__(self):
        return len(self.pairs)

    def is_valid(self, b: BipartiteGraph) -> bool:
        if len(set(self.pairs.values())) != len(self.pairs):
            return False
        return all(r in b.adjacency[l] for l, r in self.pairs.items())


def maximum_matching(b: BipartiteGraph) -> Matching:
    """Maximum matching via Hopcroft-Karp (O(E sqrt V)).

    Deterministic for a given input ordering.
    """
    if b.left_count == 0 or b.right_count == 0:
        return Matching({})
    match = maximum_bipartite_matching(b.to_csr(), perm_type="column")
    return Matching({int(l): int(r) for l, r in enumerate(match.tolist()) if r >= 0})


def uncovered_left(b: BipartiteGraph, m: Matching) -> set[int]:
    return set(range(b.left_count)) - set(m.pairs)


def hall_deficiency_report(b: BipartiteGraph, min_left_degree: float, max_right_degree: float) -> dict:
    """Degree-based Hall diagnostic.

    If every kept left vertex has degree >= ``min_left_degree`` and every right
    vertex degree <= ``max_right_degree`` with the ratio >= 1, Hall's condition
    holds on the kept side by double counting.
    """
    left_deg = [len(row) for row in b.adjacency]
    right_deg = np.zeros(b.right_count, dtype=np.int64)
    for row in b.adjacency:
        right_deg[row] += 1
    low = sum(1 for d in left_deg if d < min_left_degree)
    high = int(np.count_nonzero(right_deg > max_right_degree))
    return {
        "left_below_min_degree": low,
        "right_above_max_degree": high,
        "max_right_degree": int(right_deg.max()) if b.right_count else 0,
        "hall_by_degrees": high == 0 and min_left_degree >= max_right_degree,
    }
