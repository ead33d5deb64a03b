import math
from collections import Counter
from itertools import combinations, permutations

import numpy as np
import pytest
from scipy.stats import chisquare

from minorforge.models import (
    Configuration,
    RandomSource,
    SamplingError,
    _decode_pairs,
    project,
    random_hamilton_cycle,
    random_perfect_matching,
    sample_configuration,
    sample_g_prime,
    sample_g_simple,
    sample_g_star,
    sample_gnm,
    sample_gnp,
    sample_hamilton_plus_matching,
)


# -- enumeration oracles ------------------------------------------------------


def all_matchings(points):
    points = list(points)
    if not points:
        yield ()
        return
    a = points[0]
    for j in range(1, len(points)):
        rest = points[1:j] + points[j + 1 :]
        for m in all_matchings(rest):
            yield ((a, points[j]),) + m


def all_hamilton_cycles(n):
    """Canonical undirected cycles: start at 0, second vertex < last vertex."""
    out = set()
    for perm in permutations(range(1, n)):
        if perm[0] < perm[-1]:
            out.add((0,) + perm)
    return sorted(out)


def canonical_cycle(order):
    order = list(order)
    i = order.index(0)
    rot = order[i:] + order[:i]
    if rot[1] > rot[-1]:
        rot = [rot[0]] + rot[1:][::-1]
    return tuple(rot)


def canonical_matching(mate):
    return tuple(sorted((v, int(mate[v])) for v in range(len(mate)) if v < mate[v]))


def chi_square_p(counts: Counter, support) -> float:
    observed = np.array([counts.get(s, 0) for s in support])
    assert observed.sum() == sum(counts.values()), "sample outside the enumerated support"
    return chisquare(observed).pvalue


def test_double_factorial_counts():
    assert len(list(all_matchings(range(4)))) == 3
    assert len(list(all_matchings(range(6)))) == 15
    assert len(list(all_matchings(range(8)))) == 105
    assert len(all_hamilton_cycles(4)) == 3
    assert len(all_hamilton_cycles(5)) == 12


# -- RandomSource ---------------------------------------------------------------


def test_random_source_is_reproducible():
    a = RandomSource(42, 3).rng.integers(0, 10**9, size=8)
    b = RandomSource(42, 3).rng.integers(0, 10**9, size=8)
    c = RandomSource(42, 4).rng.integers(0, 10**9, size=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_identical_stream_gives_identical_graph():
    g1 = sample_hamilton_plus_matching(1000, RandomSource(7, 1)).host_graph()
    g2 = sample_hamilton_plus_matching(1000, RandomSource(7, 1)).host_graph()
    assert g1 == g2 and g1.to_text() == g2.to_text()


# -- configurations ---------------------------------------------------------------


def test_configuration_trivial_cases():
    c = sample_configuration(2, 1, RandomSource(0))
    assert c.canonical() == ((0, 1),)
    c = sample_configuration(1, 2, RandomSource(0))
    g = project(c)
    assert g.edges.tolist() == [[0, 0]] and g.degree(0) == 2


def test_configuration_rejects_odd():
    with pytest.raises(ValueError):
        sample_configuration(3, 3, RandomSource(0))


def test_projection_triple_edge():
    c = Configuration(2, 3, np.array([[0, 3], [1, 4], [2, 5]]))
    g = project(c)
    assert g.edges.tolist() == [[0, 1]] * 3


@pytest.mark.parametrize("n,r", [(4, 1), (2, 3), (4, 2), (8, 1)])
def test_configuration_uniform(n, r):
    src = RandomSource(11, n * 10 + r)
    support = [tuple(sorted(tuple(sorted(p)) for p in m)) for m in all_matchings(range(n * r))]
    counts = Counter(sample_configuration(n, r, src).canonical() for _ in range(10_000))
    assert chi_square_p(counts, sorted(support)) > 0.01


@pytest.mark.parametrize("n,r", [(10, 3), (7, 4), (50, 5)])
def test_projection_is_regular(n, r):
    g = sample_g_star(n, r, RandomSource(n))
    assert (g.degrees() == r).all()


# -- G*, G', G ------------------------------------------------------------------


def test_g_simple_is_simple_regular():
    for s in range(20):
        g, diag = sample_g_simple(12, 3, RandomSource(s))
        assert g.is_simple() and (g.degrees() == 3).all()
        assert diag.rejections >= 0


def test_g_prime_has_no_loops():
    saw_parallel = False
    for s in range(200):
        g = sample_g_prime(6, 3, RandomSource(s))
        assert g.loop_count() == 0
        saw_parallel |= not g.is_simple()
    assert saw_parallel


def test_resample_cap_reports_failure():
    # G*(2, 2) is never simple
    with pytest.raises(SamplingError):
        sample_g_prime(1, 2, RandomSource(0), cap=5)


def test_simple_fraction_g_star_500_3():
    src = RandomSource(2024)
    hits = sum(sample_g_star(500, 3, src).is_simple() for _ in range(5000))
    assert 0.10 <= hits / 5000 <= 0.17


def labeled_cubic_graphs(n):
    pairs = list(combinations(range(n), 2))
    out = []
    for chosen in combinations(pairs, 3 * n // 2):
        deg = [0] * n
        for a, b in chosen:
            deg[a] += 1
            deg[b] += 1
        if all(d == 3 for d in deg):
            out.append(tuple(chosen))
    return out


@pytest.mark.parametrize("n,draws", [(4, 2_000), (6, 100_000)])
def test_conditioning_chain_matches_uniform_enumeration(n, draws):
    support = labeled_cubic_graphs(n)
    assert len(support) == {4: 1, 6: 70}[n]
    src = RandomSource(99, n)
    counts = Counter()
    for _ in range(draws):
        g, _ = sample_g_simple(n, 3, src)
        counts[tuple(sorted(map(tuple, np.sort(g.edges, axis=1).tolist())))] += 1
    assert set(counts) <= set(support)
    tv = 0.5 * sum(abs(counts.get(s, 0) / draws - 1 / len(support)) for s in support)
    assert tv < 0.02


# -- matchings and Hamilton cycles --------------------------------------------------


@pytest.mark.parametrize("n", [4, 6])
def test_perfect_matching_uniform(n):
    src = RandomSource(5, n)
    support = sorted(all_matchings(range(n)))
    counts = Counter(canonical_matching(random_perfect_matching(n, src)) for _ in range(10_000))
    assert chi_square_p(counts, support) > 0.01


@pytest.mark.parametrize("n", [4, 5])
def test_hamilton_cycle_uniform(n):
    src = RandomSource(6, n)
    support = all_hamilton_cycles(n)
    counts = Counter(canonical_cycle(random_hamilton_cycle(n, src)) for _ in range(10_000))
    assert chi_square_p(counts, support) > 0.01


def test_hm_instance_invariants():
    inst = sample_hamilton_plus_matching(1000, RandomSource(1))
    p1, p2 = set(inst.P1.tolist()), set(inst.P2.tolist())
    assert not p1 & p2 and len(p1 | p2) == 1000
    assert len(inst.X1) == len(inst.X2) <= 500
    assert set(inst.X1.tolist()) <= p1 and set(inst.X2.tolist()) <= p2
    assert set(inst.mate[inst.X1].tolist()) == set(inst.X2.tolist())
    inst.with_prime(100)
    assert list(inst.X1_prime) == list(inst.X1[:100])
    assert set(inst.X2_prime.tolist()) <= set(inst.X2.tolist())
    assert list(inst.mate[inst.X1_prime]) == list(inst.X2_prime)
    host = inst.host_graph()
    assert (host.degrees() == 3).all() and host.edge_count == 1500


def test_hm_rejects_odd_n():
    with pytest.raises(ValueError):
        sample_hamilton_plus_matching(9, RandomSource(0))


# -- Erdos-Renyi ---------------------------------------------------------------------


def test_decode_pairs_is_a_bijection():
    n = 23
    pairs = _decode_pairs(np.arange(n * (n - 1) // 2))
    assert len({tuple(p) for p in pairs.tolist()}) == n * (n - 1) // 2
    assert (pairs[:, 0] < pairs[:, 1]).all() and pairs.max() == n - 1


def test_decode_pairs_large_indices():
    idx = np.array([0, 10**10, 2 * 10**10 - 1], dtype=np.int64)
    i, j = _decode_pairs(idx).T
    assert np.array_equal(j * (j - 1) // 2 + i, idx)
    assert (i < j).all()


def test_gnm_gnp_edge_cases():
    g = sample_gnm(100, 0, RandomSource(0))
    assert g.vertex_count == 100 and g.edge_count == 0
    k = sample_gnp(12, 1.0, RandomSource(0))
    assert k.edge_count == 66 and k.is_simple()
    assert sample_gnp(12, 0.0, RandomSource(0)).edge_count == 0


def test_gnm_simple_with_exact_count():
    g = sample_gnm(200, 300, RandomSource(3))
    assert g.edge_count == 300 and g.is_simple()


def test_gnm_uniform_on_tiny_space():
    # n=4, m=2: C(6,2) = 15 edge sets
    src = RandomSource(8)
    counts = Counter(tuple(sorted(map(tuple, np.sort(sample_gnm(4, 2, src).edges, axis=1).tolist()))) for _ in range(10_000))
    support = sorted(combinations(combinations(range(4), 2), 2))
    assert chi_square_p(counts, support) > 0.01


def test_gnp_mean_edge_count():
    src = RandomSource(4)
    mean = np.mean([sample_gnp(100, 0.5, src).edge_count for _ in range(1000)])
    assert 2400 <= mean <= 2550


def test_xrange_concentration_small():
    n = 10_000
    width = math.sqrt(n) * math.log(n)
    hits = sum(abs(sample_hamilton_plus_matching(n, RandomSource(1, s)).X1.size - n / 4) <= width for s in range(100))
    assert hits >= 99
