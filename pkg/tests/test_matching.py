import time
from itertools import combinations

import numpy as np
import pytest

from minorforge.matching import (
    BipartiteGraph,
    Matching,
    hall_deficiency_report,
    maximum_matching,
    uncovered_left,
)


def brute_force_matching_size(b: BipartiteGraph) -> int:
    """Best over all injective choices, by recursion on left vertices."""
    best = 0

    def go(l, used, size):
        nonlocal best
        if size + (b.left_count - l) <= best:
            return
        if l == b.left_count:
            best = max(best, size)
            return
        for r in b.adjacency[l]:
            if not used >> r & 1:
                go(l + 1, used | 1 << r, size + 1)
        go(l + 1, used, size)

    go(0, 0, 0)
    return best


def brute_force_vertex_cover(b: BipartiteGraph) -> int:
    edges = [(l, b.left_count + r) for l, row in enumerate(b.adjacency) for r in row]
    total = b.left_count + b.right_count
    for size in range(total + 1):
        for cover in combinations(range(total), size):
            chosen = set(cover)
            if all(u in chosen or v in chosen for u, v in edges):
                return size
    return total


def random_bipartite(rng, max_side=12, density=None):
    nl, nr = int(rng.integers(0, max_side + 1)), int(rng.integers(0, max_side + 1))
    p = rng.uniform(0.05, 0.6) if density is None else density
    adj = [[r for r in range(nr) if rng.random() < p] for _ in range(nl)]
    return BipartiteGraph(nl, nr, adj)


def test_complete_3x3():
    b = BipartiteGraph(3, 3, [[0, 1, 2]] * 3)
    m = maximum_matching(b)
    assert len(m) == 3 and m.is_valid(b)


def test_star():
    b = BipartiteGraph(5, 1, [[0]] * 5)
    assert len(maximum_matching(b)) == 1


def test_empty_sides():
    assert len(maximum_matching(BipartiteGraph(0, 4, []))) == 0
    assert len(maximum_matching(BipartiteGraph(3, 0, [[], [], []]))) == 0


def test_rejects_malformed_adjacency():
    with pytest.raises(ValueError):
        BipartiteGraph(1, 2, [[0, 0]])
    with pytest.raises(ValueError):
        BipartiteGraph(1, 2, [[2]])
    with pytest.raises(ValueError):
        BipartiteGraph(2, 2, [[0]])


def test_from_edges_drops_duplicates():
    b = BipartiteGraph.from_edges(2, 2, [(0, 1), (0, 1), (1, 0)])
    assert b.adjacency == [[1], [0]] and b.edge_count == 2


def test_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        b = random_bipartite(rng)
        m = maximum_matching(b)
        assert m.is_valid(b)
        assert len(m) == brute_force_matching_size(b)


def test_koenig_duality_small():
    rng = np.random.default_rng(77)
    for _ in range(60):
        b = random_bipartite(rng, max_side=5)
        assert len(maximum_matching(b)) == brute_force_vertex_cover(b)


def test_deterministic_for_same_input():
    rng = np.random.default_rng(5)
    b = random_bipartite(rng, max_side=50, density=0.1)
    assert maximum_matching(b).pairs == maximum_matching(b).pairs


def test_large_sparse_instance_is_fast():
    rng = np.random.default_rng(9)
    n, m = 100_000, 1_000_000
    left = np.repeat(np.arange(n), m // n)
    right = rng.integers(0, n, size=m)
    order = np.lexsort((right, left))
    pairs = np.unique(np.stack([left[order], right[order]], axis=1), axis=0)
    split = np.searchsorted(pairs[:, 0], np.arange(n + 1))
    adj = [pairs[split[i] : split[i + 1], 1].tolist() for i in range(n)]
    b = BipartiteGraph(n, n, adj)
    start = time.perf_counter()
    m_ = maximum_matching(b)
    assert time.perf_counter() - start < 1.0
    assert len(m_) > 0.99 * n


def test_uncovered_left_examples():
    b = BipartiteGraph(3, 3, [[0], [1], [2]])
    assert uncovered_left(b, maximum_matching(b)) == set()
    b4 = BipartiteGraph(4, 2, [[0], [1], [0], [1]])
    assert uncovered_left(b4, Matching({})) == {0, 1, 2, 3}
    iso = BipartiteGraph(3, 2, [[0], [], [1]])
    assert 1 in uncovered_left(iso, maximum_matching(iso))


def test_hall_report_by_degrees():
    b = BipartiteGraph(2, 2, [[0, 1], [0, 1]])
    rep = hall_deficiency_report(b, 2, 2)
    assert rep["hall_by_degrees"] and rep["left_below_min_degree"] == 0
    rep = hall_deficiency_report(BipartiteGraph(2, 1, [[0], [0]]), 1, 1)
    assert not rep["hall_by_degrees"] and rep["right_above_max_degree"] == 1
