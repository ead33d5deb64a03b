"""Complete-minor certificates and their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass
class MinorCertificate:
    """Branch sets witnessing ``K_order`` as a minor of a host graph.

    ``witness_edges[p]`` joins the pair ``pairs()[p]`` (lexicographic order);
    ``spanning`` optionally carries one spanning-tree edge list per set.
    """

    branch_sets: list[list[int]]
    witness_edges: list[tuple[int, int]] = field(default_factory=list)
    spanning: list[list[tuple[int, int]]] | None = None
    n: int | None = None
    r: int | None = None
    seed: int | None = None
    epsilon: float | None = None
    mode: str | None = None
    stage_log: list[dict] = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.branch_sets)

    def pairs(self) -> list[tuple[int, int]]:
        h = self.order
        return [(a, b) for a in range(h) for b in range(a + 1, h)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["order"] = self.order
        d["witness_edges"] = [list(e) for e in self.witness_edges]
        if self.spanning is not None:
            d["spanning"] = [[list(e) for e in tree] for tree in self.spanning]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "MinorCertificate":
        spanning = d.get("spanning")
        return cls(
            branch_sets=[list(map(int, s)) for s in d["branch_sets"]],
            witness_edges=[tuple(map(int, e)) for e in d.get("witness_edges", [])],
            spanning=None if spanning is None else [[tuple(e) for e in t] for t in spanning],
            n=d.get("n"),
            r=d.get("r"),
            seed=d.get("seed"),
            epsilon=d.get("epsilon"),
            mode=d.get("mode"),
            stage_log=list(d.get("stage_log", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> "MinorCertificate":
        return cls.from_dict(json.loads(text))
