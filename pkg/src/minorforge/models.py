"""Seeded samplers for the random graph models.

Every sampler takes a :class:`RandomSource` (or anything exposing a numpy
``Generator`` as ``.rng``) and is a pure function of its parameters and the
stream state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import MultiGraph

DEFAULT_RESAMPLE_CAP = 10**6


class SamplingError(RuntimeError):
    """Rejection sampling hit its attempt cap."""


class RandomSource:
    """A numpy generator derived from ``(master_seed, stream_index)``.

    Streams are spawned with :class:`numpy.random.SeedSequence` so distinct
    indices give statistically independent generators.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(entropy=self.master_seed & (2**64 - 1), spawn_key=(self.stream_index,))
        self.rng = np.random.Generator(np.random.PCG64(seq))

    def stream(self, index: int) -> "RandomSource":
        return RandomSource(self.master_seed, index)

    def __repr__(self):
        return f"RandomSource(seed={self.master_seed}, stream={self.stream_index})"


def _rng(src) -> np.random.Generator:
    if isinstance(src, np.random.Generator):
        return src
    return src.rng


# -- configuration model ---------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    """Perfect matching on the points ``V_n x [r]``.

    Point ``v * r + i`` is copy ``i`` of vertex ``v``. ``pairing`` is an
    ``(rn/2, 2)`` array of matched point pairs.
    """

    n: int
    r: int
    pairing: np.ndarray

    def mate(self) -> np.ndarray:
        out = np.empty(self.n * self.r, dtype=np.int64)
        out[self.pairing[:, 0]] = self.pairing[:, 1]
        out[self.pairing[:, 1]] = self.pairing[:, 0]
        return out

    def canonical(self) -> tuple[tuple[int, int], ...]:
        p = np.sort(self.pairing, axis=1)
        return tuple(map(tuple, p[np.lexsort((p[:, 1], p[:, 0]))].tolist()))


def random_pairing(size: int, src) -> np.ndarray:
    """Uniform perfect matching on ``0..size-1`` as an ``(size/2, 2)`` array."""
    if size % 2:
        raise ValueError("a perfect matching needs an even number of points")
    return _rng(src).permutation(size).reshape(-1, 2)


def sample_configuration(n: int, r: int, src) -> Configuration:
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    if (r * n) % 2:
        raise ValueError(f"rn must be even (r={r}, n={n})")
    return Configuration(n, r, random_pairing(n * r, src))


def project(c: Configuration) -> MultiGraph:
    return MultiGraph(c.n, c.pairing // c.r if c.r else np.zeros((0, 2), dtype=np.int64))


@dataclass
class SampleDiagnostics:
    rejections: int = 0
    p1p2_edge_count: int | None = None
    in_xrange_window: bool | None = None


def sample_g_star(n: int, r: int, src) -> MultiGraph:
    return project(sample_configuration(n, r, src))


def _rejection(n, r, src, accept, cap) -> tuple[MultiGraph, SampleDiagnostics]:
    diag = SampleDiagnostics()
    for _ in range(cap):
        g = sample_g_star(n, r, src)
        if accept(g):
            return g, diag
        diag.rejections += 1
    raise SamplingError(f"no acceptable G*({n},{r}) draw within {cap} attempts")


def sample_g_prime(n: int, r: int, src, cap: int = DEFAULT_RESAMPLE_CAP) -> MultiGraph:
    """G*(n, r) conditioned on having no loops."""
    return sample_g_prime_diag(n, r, src, cap)[0]


def sample_g_prime_diag(n, r, src, cap=DEFAULT_RESAMPLE_CAP):
    return _rejection(n, r, src, lambda g: g.loop_count() == 0, cap)


def sample_g_simple(n: int, r: int, src, cap: int = DEFAULT_RESAMPLE_CAP) -> tuple[MultiGraph, SampleDiagnostics]:
    """Uniform simple r-regular graph via rejection from G*(n, r)."""
    if (r * n) % 2:
        raise ValueError(f"rn must be even (r={r}, n={n})")
    if r >= n:
        raise ValueError(f"no simple {r}-regular graph on {n} vertices")
    return _rejection(n, r, src, MultiGraph.is_simple, cap)


# -- Hamilton cycle plus perfect matching ------------------------------------


@dataclass
class ModelInstance:
    """Exposed randomness of H(n) + G(n,1).

    ``hamilton`` lists the cycle in order; ``mate[v]`` is the M* partner of
    ``v``. ``P1``/``P2`` are the two halves of the cycle, ``X1`` the P1
    endpoints of P1-P2 matching edges in P1 order and ``X2`` their P2 ends in
    P2 order. ``X1_prime``/``X2_prime`` are filled by :meth:`with_prime`.
    """

    n: int
    hamilton: np.ndarray
    mate: np.ndarray
    P1: np.ndarray = field(init=False)
    P2: np.ndarray = field(init=False)
    X1: np.ndarray = field(init=False)
    X2: np.ndarray = field(init=False)
    X1_prime: np.ndarray | None = None
    X2_prime: np.ndarray | None = None

    def __post_init__(self):
        half = self.n // 2
        self.P1 = self.hamilton[:half]
        self.P2 = self.hamilton[half:]
        side = np.zeros(self.n, dtype=np.int8)
        side[self.P2] = 1
        self.X1 = self.P1[side[self.mate[self.P1]] == 1]
        self.X2 = self.P2[side[self.mate[self.P2]] == 0]

    def with_prime(self, kt: int) -> "ModelInstance":
        """Fix X1' as the first ``kt`` vertices of X1 and X2' as their mates."""
        if kt > self.X1.size:
            raise ValueError(f"kt={kt} exceeds |X1|={self.X1.size}")
        self.X1_prime = self.X1[:kt]
        self.X2_prime = self.mate[self.X1_prime]
        return self

    @property
    def matching_edges(self) -> np.ndarray:
        v = np.arange(self.n)
        keep = v < self.mate
        return np.stack([v[keep], self.mate[keep]], axis=1)

    def host_graph(self) -> MultiGraph:
        """Cycle edges (in cycle order) followed by the M* edges."""
        h = self.hamilton
        cyc = np.stack([h, np.roll(h, -1)], axis=1)
        return MultiGraph(self.n, np.concatenate([cyc, self.matching_edges]))

    def diagnostics(self) -> SampleDiagnostics:
        x = int(self.X1.size)
        width = math.sqrt(self.n) * math.log(self.n)
        return SampleDiagnostics(0, x, abs(x - self.n / 4) <= width)


def random_hamilton_cycle(n: int, src) -> np.ndarray:
    """Uniform undirected Hamilton cycle on ``0..n-1`` as a vertex order."""
    return _rng(src).permutation(n)


def random_perfect_matching(n: int, src) -> np.ndarray:
    """Uniform perfect matching on ``0..n-1`` as a mate array."""
    pairs = random_pairing(n, src)
    mate = np.empty(n, dtype=np.int64)
    mate[pairs[:, 0]] = pairs[:, 1]
    mate[pairs[:, 1]] = pairs[:, 0]
    return mate


def sample_hamilton_plus_matching(n: int, src, kt: int | None = None) -> ModelInstance:
    if n % 2 or n < 4:
        raise ValueError(f"H(n)+G(n,1) needs even n >= 4 (got {n})")
    cycle = random_hamilton_cycle(n, src)
    mate = random_perfect_matching(n, src)
    inst = ModelInstance(n, cycle, mate)
    if kt is not None:
        inst.with_prime(kt)
    return inst


# -- Erdos-Renyi -------------------------------------------------------------


def _decode_pairs(idx: np.ndarray) -> np.ndarray:
    """Map ``0..C(n,2)-1`` to pairs ``(i, j)``, ``i < j``, colexicographically."""
    idx = np.asarray(idx, dtype=np.int64)
    j = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) / 2).astype(np.int64)
    # float rounding can be off by one either way
    j -= (j * (j - 1) // 2) > idx
    j += ((j + 1) * j // 2) <= idx
    i = idx - j * (j - 1) // 2
    return np.stack([i, j], axis=1)


def sample_gnm(n: int, m: int, src) -> MultiGraph:
    """Uniform simple graph with ``n`` vertices and ``m`` edges."""
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ValueError(f"need 0 <= m <= C(n,2) = {total}")
    if m == 0:
        return MultiGraph(n)
    idx = _rng(src).choice(total, size=m, replace=False)
    return MultiGraph(n, _decode_pairs(idx))


def sample_gnp(n: int, p: float, src) -> MultiGraph:
    """Binomial random graph: each pair independently with probability ``p``.

    Drawn as a Binomial edge count followed by a uniform edge set of that size,
    which has the same law as independent coin flips.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    rng = _rng(src)
    m = int(rng.binomial(total, p)) if total else 0
    if m == total:
        return MultiGraph(n, _decode_pairs(np.arange(total)))
    return sample_gnm(n, m, rng)
