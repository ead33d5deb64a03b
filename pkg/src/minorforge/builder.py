"""Staged branch-set joining on H(n) + G(n,1).

P1 is cut into ``k`` consecutive candidate branch sets holding ``t``
effective vertices each. P2 is cut into segments ``Q_1, Q_2, ...`` with
geometrically shrinking effective length, each split into paths of effective
length ``ell_i``. In stage ``i`` a pair of branch sets can be joined through a
path of ``Q_i`` when the random matching links the path to both sets; a
maximum matching between unjoined pairs and paths picks the joins.

Two modes share this machinery. ``faithful`` applies the heavy-set pruning
and deletion rules with full-size paths (``ell_1 = 100``). ``practical``
keeps every pair, uses shorter connector paths and discards a small vertex
cover of the pairs left unjoined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .certificate import MinorCertificate
from .matching import BipartiteGraph, maximum_matching, uncovered_left
from .models import ModelInstance, sample_hamilton_plus_matching

FAITHFUL = "faithful"
PRACTICAL = "practical"
MODES = (FAITHFUL, PRACTICAL)

PROOF_ELL_BASE = 100
PRACTICAL_ELL_BASE = 4
PROOF_DEGREE_CAP = 10**6


class InfeasibleParams(ValueError):
    """The instance cannot host the requested branch-set layout."""


class DegenerateResult(RuntimeError):
    """Fewer than two branch sets survived the final discards."""

    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


def clique_size_for(pair_budget: float) -> int:
    """Largest ``k`` with ``k(k-1)/2 <= pair_budget``."""
    if pair_budget < 0:
        return 0
    k = int((1 + math.sqrt(1 + 8 * pair_budget)) / 2)
    while k * (k - 1) / 2 > pair_budget:
        k -= 1
    while (k + 1) * k / 2 <= pair_budget:
        k += 1
    return k


def stage_count(n: int) -> int:
    """``max(1, floor(log_3(n) / 6))`` in exact integer arithmetic."""
    i = 0
    while 3 ** (6 * (i + 1)) <= n:
        i += 1
    return max(1, i)


@dataclass
class BuilderParams:
    epsilon: float
    mode: str
    k: int
    t: int
    i0: int
    ell_base: int = PROOF_ELL_BASE
    d_cap: int = PROOF_DEGREE_CAP
    t_requested: int = 0
    delta_profile: list[float] = field(default_factory=list)
    beta_profile: list[float] = field(default_factory=list)

    @property
    def kt(self) -> int:
        return self.k * self.t

    def ell(self, i: int) -> int:
        return self.ell_base * 3 ** (i - 1)

    @classmethod
    def derive(
        cls,
        n: int,
        epsilon: float,
        mode: str = PRACTICAL,
        x1_size: int | None = None,
        ell_base: int | None = None,
        clamp_t: bool = True,
    ) -> "BuilderParams":
        """Parameters for an instance of order ``n``.

        ``t`` is ``floor(sqrt(n)/epsilon)``; with ``clamp_t`` it is lowered to
        ``floor(|X1|/k)`` so that ``kt <= |X1|``.
        """
        if not 0 < epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        k = clique_size_for(epsilon**4 * n)
        t_req = math.floor(math.sqrt(n) / epsilon + 1e-9)
        t = t_req
        if clamp_t and x1_size is not None and k > 0:
            t = min(t_req, x1_size // k)
        if ell_base is None:
            ell_base = PROOF_ELL_BASE if mode == FAITHFUL else PRACTICAL_ELL_BASE
        i0 = stage_count(n)
        u0 = k * (k - 1) / 2
        root = epsilon ** (1 / 8)
        delta = [u0 / (root * 18 ** (i - 1) * k) if k else 0.0 for i in range(1, i0 + 1)]
        beta = [(epsilon**8 / (2 * (3 ** (i - 1)) ** 7)) ** 2 for i in range(1, i0 + 1)]
        return cls(epsilon, mode, k, t, i0, ell_base, PROOF_DEGREE_CAP, t_req, delta, beta)


@dataclass
class BranchSet:
    id: int
    core_vertices: np.ndarray
    effective_vertices: np.ndarray
    absorbed_paths: list[int] = field(default_factory=list)


@dataclass
class StagePlan:
    """Per stage ``i`` (index ``i-1``): Q segment span and its path family.

    ``paths[i-1][p]`` is a ``(start, stop)`` slice of P2 positions and
    ``path_effective[i-1][p]`` the effective vertices on it.
    """

    q_spans: list[tuple[int, int]]
    q_effective: list[int]
    ells: list[int]
    paths: list[list[tuple[int, int]]]
    path_effective: list[list[np.ndarray]]

    def family_size(self, i: int) -> int:
        return len(self.paths[i - 1])


@dataclass(frozen=True)
class Join:
    stage: int
    path: int
    edge_a: tuple[int, int]  # (vertex on path, effective vertex of the lower set)
    edge_b: tuple[int, int]  # (vertex on path, effective vertex of the higher set)


@dataclass
class StageState:
    i: int
    k: int
    unjoined: list[tuple[int, int]]
    heavy: set[int] = field(default_factory=set)
    heavy_by_stage: list[set[int]] = field(default_factory=list)
    assignments: dict[tuple[int, int], Join] = field(default_factory=dict)
    spent: np.ndarray | None = None
    deleted: list[tuple[int, int]] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)

    @property
    def U(self) -> int:
        return len(self.unjoined)

    @classmethod
    def initial(cls, k: int) -> "StageState":
        return cls(1, k, list(combinations(range(k), 2)), spent=np.zeros(k, dtype=np.int64))


@dataclass
class BuildResult:
    certificate: MinorCertificate
    state: StageState
    branch_sets: list[BranchSet]
    plan: StagePlan
    params: BuilderParams
    diagnostics: dict


# -- planning -------------------------------------------------------------------


def plan(instance: ModelInstance, params: BuilderParams) -> tuple[list[BranchSet], StagePlan]:
    k, t, kt = params.k, params.t, params.kt
    if k < 2:
        raise InfeasibleParams(f"k={k} < 2: epsilon^4 n too small for two branch sets")
    if t < 1:
        raise InfeasibleParams(f"t={t} < 1")
    if kt > instance.X1.size:
        raise InfeasibleParams(f"kt={kt} > |X1|={instance.X1.size}")
    last = params.i0
    if kt // 3**last < params.ell(last):
        raise InfeasibleParams(
            f"kt/3^i0 = {kt // 3**last} < ell_i0 = {params.ell(last)}: last path family empty"
        )
    instance.with_prime(kt)

    pos1 = np.empty(instance.n, dtype=np.int64)
    pos1[instance.P1] = np.arange(instance.P1.size)
    eff_pos = pos1[instance.X1_prime]  # increasing along P1 by construction
    sets = []
    start = 0
    for j in range(k):
        stop = int(eff_pos[(j + 1) * t - 1]) + 1
        sets.append(BranchSet(j, instance.P1[start:stop], instance.X1_prime[j * t : (j + 1) * t]))
        start = stop

    pos2 = np.empty(instance.n, dtype=np.int64)
    pos2[instance.P2] = np.arange(instance.P2.size)
    eff2 = np.sort(pos2[instance.X2_prime])
    q_spans, q_eff, ells, fams, fam_eff = [], [], [], [], []
    cursor, used = 0, 0
    for i in range(1, params.i0 + 1):
        q = kt // 3**i
        ell = params.ell(i)
        block = eff2[used : used + q]
        q_spans.append((cursor, int(block[-1]) + 1))
        paths, path_eff = [], []
        p_start = cursor
        for p in range(q // ell):
            chunk = block[p * ell : (p + 1) * ell]
            p_stop = int(chunk[-1]) + 1
            paths.append((p_start, p_stop))
            path_eff.append(instance.P2[chunk])
            p_start = p_stop
        q_eff.append(q)
        ells.append(ell)
        fams.append(paths)
        fam_eff.append(path_eff)
        cursor = q_spans[-1][1]
        used += q
    return sets, StagePlan(q_spans, q_eff, ells, fams, fam_eff)


# -- stages ---------------------------------------------------------------------


def _owner_map(instance: ModelInstance, params: BuilderParams) -> np.ndarray:
    owner = np.full(instance.n, -1, dtype=np.int64)
    owner[instance.X1_prime] = np.repeat(np.arange(params.k), params.t)
    return owner


def run_stage(
    state: StageState,
    stage_plan: StagePlan,
    instance: ModelInstance,
    params: BuilderParams,
    owner: np.ndarray | None = None,
) -> StageState:
    """Run stage ``state.i`` and return the state for the next stage."""
    i = state.i
    if i > params.i0:
        raise ValueError(f"stage {i} beyond i0={params.i0}")
    if owner is None:
        owner = _owner_map(instance, params)
    new = replace(
        state,
        i=i + 1,
        heavy=set(state.heavy),
        heavy_by_stage=list(state.heavy_by_stage),
        assignments=dict(state.assignments),
        spent=state.spent.copy(),
        deleted=list(state.deleted),
        log=list(state.log),
    )
    u_before = state.U
    entry = {"i": i, "U_before": u_before, "heavy_count": 0, "deleted": 0, "paths_available": stage_plan.family_size(i)}

    # matching edges from every effective vertex of Q_i land in branch sets
    q_lo, q_hi = stage_plan.q_spans[i - 1]
    q_vertices = instance.P2[q_lo:q_hi]
    q_owner = owner[instance.mate[q_vertices]]
    new.spent += np.bincount(q_owner[q_owner >= 0], minlength=params.k)

    if u_before == 0:
        new.unjoined = []
        new.heavy_by_stage.append(set())
        entry.update(U_after=0, paths_used=0)
        new.log.append(entry)
        return new

    pairs = state.unjoined
    if params.mode == FAITHFUL:
        delta = (1.5 ** (i - 1)) * u_before / (params.epsilon ** (1 / 8) * params.k)
        load = np.zeros(params.k, dtype=np.int64)
        for a, b in pairs:
            load[a] += 1
            load[b] += 1
        heavy = set(np.flatnonzero(load > delta).tolist())
        new.heavy_by_stage.append(heavy)
        new.heavy |= heavy
        entry["heavy_count"] = len(heavy)
        entry["delta"] = delta
        bad = [p for p in pairs if p[0] in heavy or p[1] in heavy]
        if 27 * len(bad) >= 26 * u_before:
            cut = (26 * u_before) // 27
            doomed = set(bad[:cut])  # pairs are kept in lexicographic order
            new.deleted.extend(bad[:cut])
            new.unjoined = [p for p in pairs if p not in doomed]
            entry.update(U_after=new.U, paths_used=0, deleted=cut)
            new.log.append(entry)
            return new
        bad_set = set(bad)
        pairs = [p for p in pairs if p not in bad_set]
        new.deleted.extend(bad)
        entry["deleted"] = len(bad)
    else:
        new.heavy_by_stage.append(set())

    index = {p: j for j, p in enumerate(pairs)}
    adjacency: list[list[int]] = [[] for _ in pairs]
    contacts: list[dict[int, tuple[int, int]]] = []
    for p, eff in enumerate(stage_plan.path_effective[i - 1]):
        touch: dict[int, tuple[int, int]] = {}
        for u, b in zip(eff.tolist(), owner[instance.mate[eff]].tolist()):
            if b not in touch:
                touch[b] = (u, int(instance.mate[u]))
        contacts.append(touch)
        for pair in combinations(sorted(touch), 2):
            j = index.get(pair)
            if j is not None:
                adjacency[j].append(p)
    aux = BipartiteGraph(len(pairs), len(contacts), adjacency)
    match = maximum_matching(aux)
    for j, p in sorted(match.pairs.items()):
        a, b = pairs[j]
        new.assignments[(a, b)] = Join(i, p, contacts[p][a], contacts[p][b])
    if params.mode == FAITHFUL:
        entry["hall"] = _hall_report(aux, params, i)
    new.unjoined = [pairs[j] for j in sorted(uncovered_left(aux, match))]
    entry.update(U_after=new.U, paths_used=len(match))
    new.log.append(entry)
    return new


def _hall_report(aux: BipartiteGraph, params: BuilderParams, i: int) -> dict:
    from .matching import hall_deficiency_report

    eps = params.epsilon
    right_cap = params.ell(i) ** 2 if 3 ** (i - 1) < 1 / eps else params.d_cap
    rep = hall_deficiency_report(aux, 1 / (2 * eps**3), right_cap)
    rep["target_unjoined"] = 0 if not aux.left_count else aux.left_count / 27
    return rep


# -- assembly -------------------------------------------------------------------


def greedy_vertex_cover(k: int, edges: list[tuple[int, int]], excluded: set[int] = frozenset()) -> set[int]:
    """Repeatedly take a vertex of maximum remaining degree (lowest id on ties)."""
    live = [e for e in edges if e[0] not in excluded and e[1] not in excluded]
    cover: set[int] = set()
    while live:
        deg = np.zeros(k, dtype=np.int64)
        for a, b in live:
            deg[a] += 1
            deg[b] += 1
        v = int(np.argmax(deg))
        cover.add(v)
        live = [e for e in live if v not in e]
    return cover


def one_per_pair_discard(edges: list[tuple[int, int]], excluded: set[int] = frozenset()) -> set[int]:
    """Drop the higher endpoint of each unjoined pair not already hit."""
    gone: set[int] = set()
    for a, b in sorted(edges):
        if a in excluded or b in excluded or a in gone or b in gone:
            continue
        gone.add(b)
    return gone


def faithful_order(state: StageState) -> int:
    """Order the faithful discard rule would leave on ``state``."""
    gone = set(state.heavy) | one_per_pair_discard(state.unjoined, state.heavy)
    return state.k - len(gone)


def assemble(
    state: StageState,
    branch_sets: list[BranchSet],
    stage_plan: StagePlan,
    instance: ModelInstance,
    params: BuilderParams,
) -> MinorCertificate:
    heavy = set(state.heavy)
    if params.mode == FAITHFUL:
        dropped = heavy | one_per_pair_discard(state.unjoined, heavy)
    else:
        greedy = greedy_vertex_cover(params.k, state.unjoined, heavy)
        simple = one_per_pair_discard(state.unjoined, heavy)
        dropped = heavy | (greedy if len(greedy) <= len(simple) else simple)
    alive = [b.id for b in branch_sets if b.id not in dropped]
    if len(alive) < 2:
        raise DegenerateResult(f"only {len(alive)} branch set(s) survive", state)

    members = {b: [branch_sets[b].core_vertices] for b in alive}
    alive_set = set(alive)
    witness = []
    for a, b in combinations(alive, 2):
        join = state.assignments.get((a, b))
        if join is None:
            raise AssertionError(f"surviving pair {(a, b)} was never joined")
        lo, hi = stage_plan.paths[join.stage - 1][join.path]
        members[a].append(instance.P2[lo:hi])
        branch_sets[a].absorbed_paths.append((join.stage, join.path))
        witness.append(join.edge_b)
    assert alive_set == set(members)
    sets = [np.concatenate(members[b]).tolist() for b in alive]
    return MinorCertificate(branch_sets=sets, witness_edges=[tuple(map(int, e)) for e in witness])


# -- driver ---------------------------------------------------------------------


def build_minor(instance: ModelInstance, params: BuilderParams) -> BuildResult:
    """Plan, run all stages, assemble. Raises InfeasibleParams/DegenerateResult."""
    branch_sets, stage_plan = plan(instance, params)
    owner = _owner_map(instance, params)
    state = StageState.initial(params.k)
    for _ in range(params.i0):
        state = run_stage(state, stage_plan, instance, params, owner)
    cert = assemble(state, branch_sets, stage_plan, instance, params)
    cert.n = instance.n
    cert.r = 3
    cert.epsilon = params.epsilon
    cert.mode = params.mode
    cert.stage_log = [
        {key: e[key] for key in ("i", "U_before", "U_after", "heavy_count", "paths_used")} for e in state.log
    ]
    return BuildResult(cert, state, branch_sets, stage_plan, params, diagnostics(instance, params, stage_plan, state))


def diagnostics(instance, params, stage_plan, state) -> dict:
    """Rounding ledger and per-stage ratios."""
    ratios = [e["U_after"] / e["U_before"] if e["U_before"] else 0.0 for e in state.log]
    return {
        "n": instance.n,
        "x1": int(instance.X1.size),
        "k": params.k,
        "t": params.t,
        "t_requested": params.t_requested,
        "t_clamped": params.t < params.t_requested,
        "kt": params.kt,
        "i0": params.i0,
        "ells": stage_plan.ells,
        "q_effective": stage_plan.q_effective,
        "family_sizes": [len(f) for f in stage_plan.paths],
        "unused_x2_prime": params.kt - sum(stage_plan.q_effective),
        "stage_ratios": ratios,
        "heavy_total": len(state.heavy),
        "deleted_pairs": len(state.deleted),
        "final_unjoined": state.U,
    }


def run_builder(n: int, epsilon: float, mode: str, src, ell_base: int | None = None) -> tuple[ModelInstance, BuildResult]:
    """Sample H(n)+G(n,1) from ``src`` and build a certificate on it."""
    instance = sample_hamilton_plus_matching(n, src)
    params = BuilderParams.derive(n, epsilon, mode, instance.X1.size, ell_base=ell_base)
    return instance, build_minor(instance, params)
