"""Edge queries against a DFS tree: per-vertex neighbour lists ordered by post rank.

A query asks, among the edges leaving a descendant part (a vertex, a subtree
or a tree path) and landing on a target tree path, for the one landing nearest
a chosen end of the target. Ties on the landing vertex go to the smallest post
rank of the descendant-side endpoint.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from typing import NamedTuple, Sequence

from .graph import DynamicGraph
from .tree import DfsTree, TreeError

VERTEX, SUBTREE, PATH = 0, 1, 2
TOP, BOTTOM = 0, 1

Edge = tuple[int, int]  # (descendant-side endpoint, target-side endpoint)


class IndependenceError(RuntimeError):
    """Two queries of one batch share a descendant vertex."""


class StaleTreeError(RuntimeError):
    """The tree handed to ``StructureD`` does not span the graph."""


class EdgeQuery(NamedTuple):
    kind: int  # VERTEX, SUBTREE or PATH
    a: int  # the vertex, the subtree root, or the top of the descendant path
    b: int  # equal to ``a`` except for PATH, where it is the bottom
    top: int  # target path, ancestor end
    bottom: int  # target path, descendant end
    end: int  # TOP or BOTTOM: the endpoint "nearest" refers to

    @classmethod
    def vertex(cls, w: int, top: int, bottom: int, end: int = TOP) -> "EdgeQuery":
        return cls(VERTEX, w, w, top, bottom, end)

    @classmethod
    def subtree(cls, w: int, top: int, bottom: int, end: int = TOP) -> "EdgeQuery":
        return cls(SUBTREE, w, w, top, bottom, end)

    @classmethod
    def path(cls, a: int, b: int, top: int, bottom: int, end: int = TOP) -> "EdgeQuery":
        return cls(PATH, a, b, top, bottom, end)


def descendant_vertices(t: DfsTree, q: EdgeQuery) -> list[int]:
    if q.kind == VERTEX:
        return [q.a]
    if q.kind == SUBTREE:
        return t.subtree_vertices(q.a)
    v = q.b
    out = [v]
    while v != q.a:
        v = t.parent[v]
        out.append(v)
    return out


def check_query(t: DfsTree, q: EdgeQuery) -> None:
    if not (t.contains(q.top) and t.contains(q.bottom) and t.is_ancestor(q.top, q.bottom)):
        raise TreeError(f"target ({q.top}, {q.bottom}) is not an ancestor-descendant path")
    if q.kind == PATH and not (t.contains(q.a) and t.contains(q.b) and t.is_ancestor(q.a, q.b)):
        raise TreeError(f"descendant part ({q.a}, {q.b}) is not an ancestor-descendant path")


def edge_key(t: DfsTree, q: EdgeQuery, e: Edge) -> tuple[int, int]:
    """Ordering key: distance from the target end, then descendant post rank."""
    lev = t.level
    if q.end == TOP:
        d = lev[e[1]] - lev[q.top]
    else:
        d = lev[q.bottom] - lev[e[1]]
    return d, t.post[e[0]]


class StructureD:
    """Neighbour lists ordered by post rank, kept in step with the tree.

    Lists hold vertex ids and are searched with ``bisect`` keyed on the
    current post ranks, so a tree change only re-sorts the lists that touch a
    moved vertex: every other pair keeps its relative post order.
    """

    __slots__ = ("tree", "nbrs")

    def __init__(self, tree: DfsTree, g: DynamicGraph) -> None:
        live = [0] + g.vertices()
        for v in live:
            if not tree.contains(v):
                raise StaleTreeError(f"live vertex {v} is missing from the tree")
        if tree.n_vertices != g.n + 1:
            raise StaleTreeError("tree holds vertices that are not live in the graph")
        self.tree = tree
        self.nbrs = _fill(tree, g)

    def copy(self) -> "StructureD":
        d = StructureD.__new__(StructureD)
        d.tree = self.tree
        d.nbrs = [list(r) for r in self.nbrs]
        return d

    def sorted_neighbors(self, v: int) -> list[int]:
        return list(self.nbrs[v])

    # patches for graph changes that leave the tree alone
    def add_edge(self, u: int, v: int) -> None:
        key = self.tree.post.__getitem__
        insort(self.nbrs[u], v, key=key)
        insort(self.nbrs[v], u, key=key)

    def remove_edge(self, u: int, v: int) -> None:
        self.nbrs[u].remove(v)
        self.nbrs[v].remove(u)

    def retarget(
        self,
        tree: DfsTree,
        g: DynamicGraph,
        blocks: Sequence[Sequence[int]],
        removed: int | None = None,
    ) -> None:
        """Switch to ``tree``, which differs from the old one only at ``blocks``.

        Each block is a set of moved vertices (a rerooted subtree, or a single
        inserted vertex) whose post ranks are contiguous in both trees. Lists
        of moved vertices are rebuilt; any other list swaps one run per block,
        since unmoved vertices keep their relative post order. ``removed`` must
        already have lost its edges; edges added by the update are picked up
        from ``g``.
        """
        if tree.n_vertices != g.n + 1:
            raise StaleTreeError("tree holds vertices that are not live in the graph")
        moved = [v for blk in blocks for v in blk]
        for v in moved:
            if not tree.contains(v):
                raise StaleTreeError(f"moved vertex {v} is missing from the tree")
        if 2 * len(moved) > g.n:
            # most of the tree moved: a full refill is cheaper than patching
            self.nbrs = _fill(tree, g)
            self.tree = tree
            return
        nbrs = self.nbrs
        if len(nbrs) < g.capacity:
            nbrs.extend([] for _ in range(g.capacity - len(nbrs)))
        old = self.tree
        old_key = old.post.__getitem__
        key = tree.post.__getitem__
        moved_set = set(moved)
        # runs[y]: per block, the moved neighbours of unmoved y
        runs: dict[int, list[list[int]]] = {}
        spans = []
        for blk in blocks:
            ranks = [old.post[v] for v in blk if old.contains(v)]
            spans.append((min(ranks), max(ranks)) if ranks else None)
            seen: dict[int, list[int]] = {}
            for v in blk:
                for y in g.adj[v]:
                    if y not in moved_set:
                        seen.setdefault(y, []).append(v)
            for y, run in seen.items():
                runs.setdefault(y, []).append(run)
        for v in moved:
            nbrs[v] = sorted(g.adj[v], key=key)
        touched = set(runs)
        for y in list(touched):
            if y >= len(old.post) or not old.contains(y):
                touched.discard(y)
        for y in touched:
            r = nbrs[y]
            for span in spans:
                if span is not None:
                    del r[bisect_left(r, span[0], key=old_key):bisect_right(r, span[1], key=old_key)]
        for y, rs in runs.items():
            r = nbrs[y]
            for run in rs:
                run.sort(key=key)
                i = bisect_left(r, key(run[0]), key=key)
                r[i:i] = run
        if removed is not None:
            nbrs[removed] = []
        self.tree = tree

    def total_entries(self) -> int:
        return sum(len(r) for r in self.nbrs)


def _fill(tree: DfsTree, g: DynamicGraph) -> list[list[int]]:
    """All lists in linear time: visiting vertices in post order appends them sorted."""
    nbrs: list[list[int]] = [[] for _ in range(g.capacity)]
    adj = g.adj
    for y in tree.by_post[1:]:
        for x in adj[y]:
            nbrs[x].append(y)
    return nbrs


def query_one(d: StructureD, q: EdgeQuery) -> Edge | None:
    """Answer one query by binary search over the neighbour lists."""
    t = d.tree
    check_query(t, q)
    post = t.post
    size = t.size
    level = t.level
    lists = d.nbrs
    key = post.__getitem__
    top, bottom = q.top, q.bottom
    ptop = post[top]
    stop = ptop - size[top]
    want_top = q.end == TOP
    best: Edge | None = None
    best_key: tuple[int, int] | None = None

    def offer(x: int, y: int) -> None:
        nonlocal best, best_key
        dist = level[y] - level[top] if want_top else level[bottom] - level[y]
        k = (dist, post[x])
        if best_key is None or k < best_key:
            best, best_key = (x, y), k

    # forward: for each descendant vertex u below the target top, the
    # neighbours of u on the target are its ancestors between top and lca(u, bottom)
    for u in descendant_vertices(t, q):
        pu = post[u]
        if not (stop < pu <= ptop):
            continue
        lo = post[t.lca(u, bottom)]
        r = lists[u]
        if want_top:
            i = bisect_right(r, ptop, key=key) - 1
            if i >= 0 and post[r[i]] >= lo:
                offer(u, r[i])
        else:
            i = bisect_left(r, lo, key=key)
            if i < len(r) and post[r[i]] <= ptop:
                offer(u, r[i])

    # reverse: the descendant path may lie above part of the target; then search
    # the target vertices' lists for ancestors on the descendant path
    if q.kind != SUBTREE:
        c, dd = q.a, q.b
        pc = post[c]
        sc = pc - size[c]
        z = bottom
        ltop = level[top]
        while level[z] >= ltop and sc < post[z] <= pc:
            lo = post[t.lca(z, dd)]
            r = lists[z]
            i = bisect_left(r, lo, key=key)
            if i < len(r) and post[r[i]] <= pc:
                offer(r[i], z)
            if z == top:
                break
            z = t.parent[z]
    return best


def check_independent(t: DfsTree, queries: Sequence[EdgeQuery]) -> list[int]:
    """Owner index per vertex; raises when two descendant parts overlap."""
    owner = [-1] * len(t.post)
    for i, q in enumerate(queries):
        for v in descendant_vertices(t, q):
            j = owner[v]
            if j != -1 and j != i:
                raise IndependenceError(
                    f"queries {j} and {i} share descendant vertex {v}: {queries[j]} / {q}"
                )
            owner[v] = i
    return owner


class MemoryBackend:
    """Answers each query by binary search; one batch counts as one round."""

    name = "memory"

    def __init__(self, d: StructureD) -> None:
        self.d = d
        self.batches = 0
        self.passes = 0

    def run_batch(self, queries: Sequence[EdgeQuery]) -> list[Edge | None]:
        check_independent(self.d.tree, queries)
        self.batches += 1
        d = self.d
        return [query_one(d, q) for q in queries]


class StreamBackend:
    """Answers a whole batch with one linear scan over the edge stream.

    Each vertex belongs to at most one query's descendant part, so every edge
    orientation is checked against a single query. Scans are serialised.
    """

    name = "stream"

    def __init__(self, tree: DfsTree, edges: Sequence[Edge]) -> None:
        self.tree = tree
        self.edges = edges
        self.batches = 0
        self.passes = 0

    def run_batch(self, queries: Sequence[EdgeQuery]) -> list[Edge | None]:
        t = self.tree
        for q in queries:
            check_query(t, q)
        owner = check_independent(t, queries)
        self.batches += 1
        self.passes += 1
        post = t.post
        size = t.size
        level = t.level
        spans = []
        for q in queries:
            # target membership: ancestor of bottom and descendant of top
            spans.append((post[q.top], post[q.top] - size[q.top], level[q.top], level[q.bottom]))
        best: list[Edge | None] = [None] * len(queries)
        keys: list[tuple[int, int] | None] = [None] * len(queries)
        cap = len(post)
        for u, v in self.edges:
            if u >= cap or v >= cap:
                continue  # a vertex inserted by the current update is not in the tree yet
            for x, y in ((u, v), (v, u)):
                i = owner[x]
                if i < 0:
                    continue
                q = queries[i]
                ptop, stop, ltop, lbot = spans[i]
                py = post[y]
                if not (stop < py <= ptop):
                    continue
                pb = post[q.bottom]
                if not (py - size[y] < pb <= py):
                    continue
                dist = level[y] - ltop if q.end == TOP else lbot - level[y]
                k = (dist, post[x])
                if keys[i] is None or k < keys[i]:
                    keys[i] = k
                    best[i] = (x, y)
        return best
