"""Seeded random graphs and update streams, run through the engine."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import TextIO

from .graph import DynamicGraph
from .reduction import Engine, Update


class HarnessFailure(AssertionError):
    """First failing step of a harness run; ``token`` replays it."""

    def __init__(self, seed: int, step: int, cause: BaseException) -> None:
        super().__init__(f"seed={seed} step={step}: {type(cause).__name__}: {cause}")
        self.seed = seed
        self.step = step
        self.token = f"{seed}:{step}"
        self.cause = cause


def random_graph(rng: random.Random, n: int, density: float) -> DynamicGraph:
    """Erdos-Renyi G(n, p) on vertices 1..n."""
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < density]
    return DynamicGraph.from_edge_list(n, edges)


def random_update(rng: random.Random, g: DynamicGraph, density: float) -> Update:
    """A feasible update: never duplicates an edge, never touches the pseudo root."""
    verts = g.vertices()
    n = len(verts)
    choices = ["iv"]
    if n >= 2 and g.m < n * (n - 1) // 2:
        choices.append("ie")
    if g.m:
        choices.append("de")
    if n:
        choices.append("dv")
    weights = {"ie": 4, "de": 4, "iv": 1, "dv": 1}
    kind = rng.choices(choices, [weights[c] for c in choices])[0]
    if kind == "ie":
        while True:
            u, v = rng.sample(verts, 2)
            if not g.has_edge(u, v):
                return Update("ie", min(u, v), max(u, v))
    if kind == "de":
        u, v = g.edge_list()[rng.randrange(len(g.edge_list()))]
        while u == 0:
            u, v = g.edge_list()[rng.randrange(len(g.edge_list()))]
        return Update("de", u, v)
    if kind == "dv":
        return Update("dv", rng.choice(verts))
    u = g.capacity
    nbrs = tuple(v for v in verts if rng.random() < density)
    return Update("iv", u, nbrs=nbrs)


@dataclass
class HarnessReport:
    seed: int
    n: int
    density: float
    records: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        ms = [r["metrics"] for r in self.records]
        batches = [m["query_batches"] for m in ms]
        return {
            "seed": self.seed,
            "n": self.n,
            "density": self.density,
            "updates": len(ms),
            "all_valid": all(r["valid"] is not False for r in self.records),
            "mean_batches": sum(batches) / len(batches) if batches else 0.0,
            "max_batches": max(batches, default=0),
            "mean_passes": sum(m["passes"] for m in ms) / len(ms) if ms else 0.0,
            "mean_wall_time": sum(m["wall_time"] for m in ms) / len(ms) if ms else 0.0,
            "max_reroot_size": max((m["max_reroot_size"] for m in ms), default=0),
        }

    def write(self, out: TextIO, with_times: bool = True) -> None:
        for r in self.records:
            rec = r if with_times else _strip_time(r)
            out.write(json.dumps(rec, sort_keys=True) + "\n")
        s = self.summary()
        if not with_times:
            s.pop("mean_wall_time")
        out.write(json.dumps({"summary": s}, sort_keys=True) + "\n")


def _strip_time(r: dict) -> dict:
    m = dict(r["metrics"])
    m.pop("wall_time", None)
    return {**r, "metrics": m}


def random_harness(
    seed: int,
    n: int,
    density: float,
    k: int,
    backend: str = "memory",
    instrument: bool = False,
    verify: bool = True,
    keep_trees: bool = False,
    trace: TextIO | None = None,
) -> HarnessReport:
    """Run ``k`` random updates on G(n, density); halts on the first failure."""
    rng = random.Random(seed)
    g = random_graph(rng, n, density)
    eng = Engine(g, backend=backend, instrument=instrument, verify=verify, trace=trace)
    report = HarnessReport(seed, n, density)
    for step in range(k):
        up = random_update(rng, eng.g, density)
        try:
            t, m = eng.apply_update(up)
        except Exception as e:
            raise HarnessFailure(seed, step, e) from e
        rec = {"update": str(up), "valid": m.valid, "metrics": m.as_dict()}
        if keep_trees:
            rec["tree"] = t.format()
        report.records.append(rec)
    return report


def replay(token: str, n: int, density: float, backend: str = "memory", instrument: bool = True) -> None:
    """Re-run a failing ``seed:step`` token up to and including the failing step."""
    seed, step = (int(x) for x in token.split(":"))
    random_harness(seed, n, density, step + 1, backend=backend, instrument=instrument)
