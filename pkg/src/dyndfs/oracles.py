"""Reference checks that share no code with the tree index or structure D.

They read only public data: graph adjacency, the tree's root, parent array
and child order. Everything else (ancestry, post order, levels) is
recomputed here from scratch.
"""

from __future__ import annotations

from itertools import chain
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import PSEUDO_ROOT, DynamicGraph
from .structure_d import BOTTOM, PATH, SUBTREE, VERTEX, EdgeQuery
from .tree import NO_PARENT, DfsTree

ENUM_LIMIT = 9


def _euler_times(root: int, children: Sequence[Sequence[int]], cap: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entry/exit times and depth by an explicit stack walk; -1 marks unreached."""
    tin = [-1] * cap
    tout = [-1] * cap
    depth = [0] * cap
    clock = 0
    stack = [(root, iter(children[root]))]
    tin[root] = clock
    clock += 1
    while stack:
        v, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            tout[v] = clock
            clock += 1
            stack.pop()
            continue
        if tin[nxt] != -1:
            # revisiting means the child lists do not describe a tree
            break
        tin[nxt] = clock
        clock += 1
        depth[nxt] = depth[v] + 1
        stack.append((nxt, iter(children[nxt])))
    return np.array(tin, dtype=np.int64), np.array(tout, dtype=np.int64), np.array(depth, dtype=np.int64)


def oracle_validity(g: DynamicGraph, t: DfsTree) -> bool:
    """True when ``t`` is a DFS tree of the augmented graph rooted at the pseudo root."""
    root = t.root
    parent = list(t.parent)
    live = [PSEUDO_ROOT] + g.vertices()
    cap = max(g.capacity, len(parent))
    parent += [NO_PARENT] * (cap - len(parent))
    if root != PSEUDO_ROOT:
        return False
    members = set(live)
    for v in range(cap):
        p = parent[v]
        if v == root:
            continue
        if (v in members) != (p != NO_PARENT):
            return False
        if p != NO_PARENT and (p not in members or p not in g.adj[v]):
            return False
    kids: list[list[int]] = [[] for _ in range(cap)]
    for v in live:
        if v != root:
            kids[parent[v]].append(v)
    tin, tout, _ = _euler_times(root, kids, cap)
    if (tin[np.asarray(live, dtype=np.int64)] < 0).any():
        return False
    flat = g.edge_list()
    edges = np.fromiter(chain.from_iterable(flat), dtype=np.int64, count=2 * len(flat)).reshape(-1, 2)
    if len(edges) == 0:
        return True
    a, b = edges[:, 0], edges[:, 1]
    a_over_b = (tin[a] <= tin[b]) & (tout[b] <= tout[a])
    b_over_a = (tin[b] <= tin[a]) & (tout[a] <= tout[b])
    return bool(np.all(a_over_b | b_over_a))


def oracle_validity_naive(g: DynamicGraph, t: DfsTree) -> bool:
    """Same contract, with ancestry tested by walking parent chains."""
    parent = t.parent
    live = [PSEUDO_ROOT] + g.vertices()

    def ancestors(v: int) -> set[int] | None:
        seen = [v]
        while v != t.root:
            if v >= len(parent) or parent[v] == NO_PARENT or len(seen) > len(live):
                return None
            if parent[v] not in g.adj[v]:
                return None
            v = parent[v]
            seen.append(v)
        return set(seen)

    anc = {}
    for v in live:
        c = ancestors(v)
        if c is None:
            return False
        anc[v] = c
    if t.root != PSEUDO_ROOT or sum(1 for v in range(len(parent)) if parent[v] != NO_PARENT) != len(live) - 1:
        return False
    for u, v in g.edge_list():
        if u not in anc[v] and v not in anc[u]:
            return False
    return True


def _default_key(v: int) -> float:
    return float("inf") if v == PSEUDO_ROOT else v


def oracle_ref_dfs(
    g: DynamicGraph,
    root: int = PSEUDO_ROOT,
    order: Callable[[int], float] | None = None,
    skip_pseudo: bool = False,
) -> DfsTree:
    """Textbook recursive DFS; neighbours by ascending ``order`` (pseudo root last)."""
    import sys

    key = order or _default_key
    parent = [NO_PARENT] * g.capacity
    visited = {root}
    if skip_pseudo:
        visited.add(PSEUDO_ROOT)
    children: list[list[int]] = [[] for _ in range(g.capacity)]

    def visit(v: int) -> None:
        for w in sorted(g.adj[v], key=key):
            if w not in visited:
                visited.add(w)
                parent[w] = v
                children[v].append(w)
                visit(w)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * g.capacity + 100))
    try:
        visit(root)
    finally:
        sys.setrecursionlimit(old)
    return DfsTree(root, parent, children)


def oracle_enum_dfs(g: DynamicGraph, root: int = PSEUDO_ROOT, skip_pseudo: bool = False) -> set[tuple[tuple[int, int], ...]]:
    """Every DFS tree from ``root`` as a sorted tuple of ``(vertex, parent)`` pairs."""
    verts = [v for v in [PSEUDO_ROOT] + g.vertices() if not (skip_pseudo and v == PSEUDO_ROOT)]
    if len(verts) - (0 if skip_pseudo else 1) > ENUM_LIMIT:
        raise ValueError(f"enumeration refused above {ENUM_LIMIT} vertices")
    adj = {v: sorted(w for w in g.adj[v] if w in verts) for v in verts}
    found: set[tuple[tuple[int, int], ...]] = set()
    seen_states: set = set()

    def grow(stack: tuple[int, ...], visited: frozenset, edges: frozenset) -> None:
        state = (stack, edges)
        if state in seen_states:
            return
        seen_states.add(state)
        if not stack:
            if len(visited) == len(verts):
                found.add(tuple(sorted(edges)))
            return
        v = stack[-1]
        fresh = [w for w in adj[v] if w not in visited]
        if not fresh:
            grow(stack[:-1], visited, edges)
            return
        for w in fresh:
            grow(stack + (w,), visited | {w}, edges | {(w, v)})

    grow((root,), frozenset([root]), frozenset())
    return found


def tree_signature(t: DfsTree) -> tuple[tuple[int, int], ...]:
    """Tree as the sorted ``(vertex, parent)`` pairs used by ``oracle_enum_dfs``."""
    return tuple(sorted((v, t.parent[v]) for v in range(len(t.parent)) if t.parent[v] != NO_PARENT and v != t.root))


class BruteForceScanner:
    """Linear filter-and-extremize reference for edge queries on one tree."""

    def __init__(self, g: DynamicGraph, t: DfsTree) -> None:
        cap = len(t.parent)
        self.g = g
        self.t = t
        self.parent = t.parent
        tin, tout, depth = _euler_times(t.root, t.children, cap)
        self.tin, self.tout, self.depth = tin.tolist(), tout.tolist(), depth.tolist()
        # post ranks recomputed from the child order
        post = [0] * cap
        rank = 0
        stack = [(t.root, iter(t.children[t.root]))]
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                rank += 1
                post[v] = rank
                stack.pop()
            else:
                stack.append((nxt, iter(t.children[nxt])))
        self.post = post

    def _anc(self, a: int, d: int) -> bool:
        return self.tin[a] <= self.tin[d] and self.tout[d] <= self.tout[a]

    def part(self, q: EdgeQuery) -> set[int]:
        if q.kind == VERTEX:
            return {q.a}
        if q.kind == SUBTREE:
            return {v for v in range(len(self.parent)) if self.tin[v] >= 0 and self._anc(q.a, v)}
        out = {q.b}
        v = q.b
        while v != q.a:
            v = self.parent[v]
            out.add(v)
        return out

    def target(self, q: EdgeQuery) -> set[int]:
        out = {q.bottom}
        v = q.bottom
        while v != q.top:
            v = self.parent[v]
            out.add(v)
        return out

    def query(self, q: EdgeQuery):
        part = self.part(q)
        tgt = self.target(q)
        best = None
        best_key = None
        for u, v in self.g.edge_list():
            for x, y in ((u, v), (v, u)):
                if x in part and y in tgt:
                    if q.end == BOTTOM:
                        dist = self.depth[q.bottom] - self.depth[y]
                    else:
                        dist = self.depth[y] - self.depth[q.top]
                    k = (dist, self.post[x])
                    if best_key is None or k < best_key:
                        best, best_key = (x, y), k
        return best


def oracle_bf_edge_scan(g: DynamicGraph, t: DfsTree, q: EdgeQuery):
    return BruteForceScanner(g, t).query(q)


def connected_graphs(n: int) -> Iterable[list[tuple[int, int]]]:
    """All connected simple graphs on vertices 1..n, as edge lists (labelled)."""
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if _connected(n, edges):
            yield edges


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    if n <= 1:
        return True
    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n
