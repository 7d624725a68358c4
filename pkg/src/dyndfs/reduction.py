"""Turn one graph update into direct tree edits plus disjoint reroot tasks."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import TextIO

from .graph import PSEUDO_ROOT, DynamicGraph, GraphError
from .metrics import Metrics, batch_bound
from .oracles import oracle_validity
from .reroot import Rerooter
from .structure_d import BOTTOM, EdgeQuery, MemoryBackend, StreamBackend, StructureD
from .tree import NO_PARENT, DfsTree, static_dfs

REDUCTION_BATCH_CAP = 4


class UpdateError(ValueError):
    """Malformed or infeasible update; the engine state is left unchanged."""


class ValidityError(RuntimeError):
    """The tree after an update failed the DFS validity check."""


@dataclass(frozen=True)
class Update:
    kind: str  # "ie", "de", "iv" or "dv"
    u: int
    v: int = -1
    nbrs: tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.kind in ("ie", "de"):
            return f"{self.kind} {self.u} {self.v}"
        if self.kind == "iv":
            return " ".join(["iv", str(self.u), *map(str, self.nbrs)])
        return f"dv {self.u}"


def parse_update(line: str, lineno: int | None = None) -> Update:
    where = f"line {lineno}: " if lineno is not None else ""
    parts = line.split()
    if not parts:
        raise UpdateError(f"{where}empty update")
    op, args = parts[0], parts[1:]
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise UpdateError(f"{where}non-integer argument in {line.strip()!r}") from None
    if op in ("ie", "de"):
        if len(nums) != 2:
            raise UpdateError(f"{where}{op} takes two vertices")
        return Update(op, nums[0], nums[1])
    if op == "iv":
        if not nums:
            raise UpdateError(f"{where}iv needs a vertex id")
        return Update("iv", nums[0], nbrs=tuple(nums[1:]))
    if op == "dv":
        if len(nums) != 1:
            raise UpdateError(f"{where}dv takes one vertex")
        return Update("dv", nums[0])
    raise UpdateError(f"{where}unknown update kind {op!r}")


def parse_updates(text: str) -> list[Update]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse_update(line, lineno))
    return out


@dataclass(frozen=True)
class RerootTask:
    subtree_root: int
    new_root: int
    attach_parent: int  # endpoint of the attach edge already in the new tree

    @property
    def attach_edge(self) -> tuple[int, int]:
        return self.attach_parent, self.new_root


@dataclass
class Plan:
    kind: str
    tasks: list[RerootTask] = field(default_factory=list)
    removed: int | None = None  # vertex dropped from the tree
    added: tuple[int, int] | None = None  # (new vertex, its parent)
    batches: int = 0

    @property
    def changes_tree(self) -> bool:
        return bool(self.tasks) or self.removed is not None or self.added is not None


def _lowest_edge_tasks(t: DfsTree, roots: list[int], anchor: int, run_batch) -> list[RerootTask]:
    """For each subtree, its lowest edge onto path(root, anchor), in one batch."""
    if not roots:
        return []
    qs = [EdgeQuery.subtree(r, t.root, anchor, BOTTOM) for r in roots]
    res = run_batch(qs)
    tasks = []
    for r, e in zip(roots, res):
        if e is None:
            raise RuntimeError(f"subtree {r} has no edge to path({t.root}, {anchor})")
        tasks.append(RerootTask(r, e[0], e[1]))
    return tasks


def plan_update(up: Update, t: DfsTree, g: DynamicGraph, run_batch) -> Plan:
    """Plan ``up`` against the pre-update tree; ``g`` already reflects the update.

    ``run_batch`` answers edge queries against a structure that no longer
    holds the removed edges.
    """
    count = [0]

    def batch(qs):
        count[0] += 1
        return run_batch(qs)

    if up.kind == "ie":
        u, v = up.u, up.v
        if t.is_back_edge(u, v):
            plan = Plan("ie-back")
        else:
            w = t.lca(u, v)
            top = t.child_containing(w, v)
            plan = Plan("ie-cross", [RerootTask(top, v, u)])
    elif up.kind == "de":
        u, v = up.u, up.v
        if t.parent[u] == v:
            u, v = v, u
        if t.parent[v] != u:
            plan = Plan("de-back")
        else:
            plan = Plan("de-tree", _lowest_edge_tasks(t, [v], u, batch))
    elif up.kind == "dv":
        u = up.u
        kids = list(t.children[u])
        plan = Plan("dv", _lowest_edge_tasks(t, kids, t.parent[u], batch), removed=u)
    elif up.kind == "iv":
        u = up.u
        nbrs = [x for x in up.nbrs if x != PSEUDO_ROOT]
        if not nbrs:
            plan = Plan("iv", added=(u, PSEUDO_ROOT))
        else:
            post = t.post
            vj = min(nbrs, key=lambda x: post[x])
            by_root: dict[int, int] = {}
            for x in nbrs:
                if t.is_ancestor(x, vj):
                    continue
                top = t.child_containing(t.lca(x, vj), x)
                # several neighbours in one hanging subtree: the lowest post rank wins
                if top not in by_root or post[x] < post[by_root[top]]:
                    by_root[top] = x
            tasks = [RerootTask(r, by_root[r], u) for r in by_root]
            plan = Plan("iv", tasks, added=(u, vj))
    else:
        raise UpdateError(f"unknown update kind {up.kind!r}")
    plan.tasks.sort(key=lambda k: t.post[k.subtree_root])
    plan.batches = count[0]
    _check_plan(t, plan)
    return plan


def _check_plan(t: DfsTree, plan: Plan) -> None:
    if plan.batches > REDUCTION_BATCH_CAP:
        raise RuntimeError(f"reduction used {plan.batches} batches (cap {REDUCTION_BATCH_CAP})")
    roots = [k.subtree_root for k in plan.tasks]
    for i, a in enumerate(roots):
        if not t.is_ancestor(a, plan.tasks[i].new_root):
            raise RuntimeError(f"task new root {plan.tasks[i].new_root} is outside T({a})")
        for b in roots[i + 1:]:
            if t.is_ancestor(a, b) or t.is_ancestor(b, a):
                raise RuntimeError(f"reroot tasks T({a}) and T({b}) overlap")


class Engine:
    """Holds (graph, tree, structure D) and applies updates atomically."""

    def __init__(
        self,
        g: DynamicGraph,
        backend: str = "memory",
        instrument: bool = False,
        verify: bool = False,
        trace: TextIO | None = None,
    ) -> None:
        if backend not in ("memory", "stream"):
            raise ValueError(f"unknown backend {backend!r}")
        self.g = g
        self.backend = backend
        self.instrument = instrument
        self.verify = verify
        self.trace = trace
        self.t = static_dfs(g)
        self.d = StructureD(self.t, g)
        self.updates = 0

    def copy(self) -> "Engine":
        """Independent engine in the same state; trees are never mutated, so ``t`` is shared."""
        e = Engine.__new__(Engine)
        e.__dict__.update(self.__dict__)
        e.g = self.g.copy()
        e.d = self.d.copy()
        return e

    # -- the update path --------------------------------------------------

    def apply_update(self, up: Update) -> tuple[DfsTree, Metrics]:
        start = time.perf_counter()
        undo = self._apply_to_graph(up)
        patched: list[tuple[str, int, int]] = []
        try:
            metrics = self._execute(up, patched)
        except BaseException:
            undo()
            self._restore_d(patched)
            raise
        metrics.wall_time = time.perf_counter() - start
        self.updates += 1
        return self.t, metrics

    def _apply_to_graph(self, up: Update):
        g = self.g
        try:
            if up.kind == "ie":
                g.insert_edge(up.u, up.v)
                return lambda: g.delete_edge(up.u, up.v)
            if up.kind == "de":
                g.delete_edge(up.u, up.v)
                return lambda: g.insert_edge(up.u, up.v)
            if up.kind == "iv":
                g.insert_vertex(up.u, [x for x in up.nbrs if x != PSEUDO_ROOT])
                return lambda: g.undo_insert_vertex(up.u)
            if up.kind == "dv":
                nbrs = g.delete_vertex(up.u)
                return lambda: g.undo_delete_vertex(up.u, nbrs)
        except GraphError as e:
            raise UpdateError(f"infeasible update '{up}': {e}") from None
        raise UpdateError(f"unknown update kind {up.kind!r}")

    def _restore_d(self, patched) -> None:
        for op, a, b in reversed(patched):
            if op == "remove":
                self.d.add_edge(a, b)
            else:
                self.d.remove_edge(a, b)

    def _execute(self, up: Update, patched) -> Metrics:
        t, g, d = self.t, self.g, self.d
        # drop removed edges from D before any query runs
        if up.kind == "de":
            d.remove_edge(up.u, up.v)
            patched.append(("remove", up.u, up.v))
        elif up.kind == "dv":
            for x in list(d.sorted_neighbors(up.u)):
                d.remove_edge(up.u, x)
                patched.append(("remove", up.u, x))
        backend = self._backend()
        plan = plan_update(up, t, g, backend.run_batch)
        m = Metrics(kind=plan.kind, reduction_batches=plan.batches)
        if not plan.changes_tree:
            if up.kind == "ie":
                d.add_edge(up.u, up.v)
                patched.append(("add", up.u, up.v))
            m.query_batches = backend.batches
            m.passes = backend.passes
            self._check(m, self.t)
            return m

        parent = list(t.parent) + [NO_PARENT] * (g.capacity - len(t.parent))
        moved: list[int] = []
        blocks: list[list[int]] = []
        for task in plan.tasks:
            rr = Rerooter(t, backend.run_batch, g, instrument=self.instrument, trace=self.trace)
            res = rr.reroot(task.subtree_root, task.new_root, task.attach_parent)
            if res.parent[task.new_root] != task.attach_parent:
                raise RuntimeError("rerooted subtree does not hang from its attach edge")
            parent_of = res.parent
            for v in res.order:
                parent[v] = parent_of[v]
            moved.extend(res.order)
            blocks.append(res.order)
            m.absorb(res.stats)
        if plan.removed is not None:
            parent[plan.removed] = NO_PARENT
        if plan.added is not None:
            u, p = plan.added
            parent[u] = p
            moved.insert(0, u)
            blocks.append([u])
        new_t = _splice(t, parent, moved, plan.removed)
        m.query_batches = backend.batches
        m.passes = backend.passes
        self._check(m, new_t)
        self.d.retarget(new_t, g, blocks, plan.removed)
        self.t = new_t
        patched.clear()
        return m

    def _backend(self):
        if self.backend == "memory":
            return MemoryBackend(self.d)
        return StreamBackend(self.t, self.g.edge_list())

    def _check(self, m: Metrics, t: DfsTree) -> None:
        if m.max_reroot_size and m.max_reroot_batches > batch_bound(m.max_reroot_size):
            raise RuntimeError("reroot batch bound exceeded")
        if self.verify or self.instrument:
            m.valid = oracle_validity(self.g, t)
            if not m.valid:
                raise ValidityError(f"tree after update {self.updates + 1} is not a DFS tree")


def _splice(t: DfsTree, parent: list[int], moved: list[int], removed: int | None) -> DfsTree:
    """New tree: untouched children keep their order, moved vertices follow in attach order."""
    cap = len(parent)
    moved_set = set(moved)
    children: list[list[int]] = [[] for _ in range(cap)]
    for v in range(len(t.children)):
        if v == removed or parent[v] == NO_PARENT and v != t.root:
            continue
        children[v] = [c for c in t.children[v] if c not in moved_set and c != removed]
    for v in moved:
        children[parent[v]].append(v)
    return DfsTree(t.root, parent, children)
