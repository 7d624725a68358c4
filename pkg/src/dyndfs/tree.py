"""Rooted DFS tree with post-order, level, size and an Euler-tour LCA index."""

from __future__ import annotations

from bisect import bisect_right
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .graph import PSEUDO_ROOT, DynamicGraph

NO_PARENT = -1


class TreeError(RuntimeError):
    """Corrupt parent links or a tree query with broken preconditions."""


class TreePath(NamedTuple):
    """Ancestor-descendant path given by its ancestor end and descendant end."""

    top: int
    bottom: int


class DfsTree:
    """Rooted spanning tree plus the derived indices.

    ``post`` ranks run 1..N; descendants of ``v`` occupy the rank interval
    ``[post[v] - size[v] + 1, post[v]]``. ``by_post[r]`` is the vertex of rank
    ``r``. Absent vertices have ``parent == NO_PARENT`` and ``post == 0``.
    """

    __slots__ = (
        "root", "parent", "children", "post", "level", "size", "by_post",
        "_first", "_sparse", "n_vertices",
    )

    def __init__(self, root: int, parent: list[int], children: list[list[int]]) -> None:
        self.root = root
        self.parent = parent
        self.children = children
        self.rebuild_indices()

    # -- construction -------------------------------------------------

    @classmethod
    def from_parent(cls, root: int, parent: Sequence[int], order: Sequence[int] | None = None) -> "DfsTree":
        """Build from parent links; children follow ``order`` (default ascending id)."""
        cap = len(parent)
        children: list[list[int]] = [[] for _ in range(cap)]
        seq = range(cap) if order is None else order
        for v in seq:
            p = parent[v]
            if v != root and p != NO_PARENT:
                children[p].append(v)
        return cls(root, list(parent), children)

    def copy(self) -> "DfsTree":
        t = DfsTree.__new__(DfsTree)
        t.root = self.root
        t.parent = list(self.parent)
        t.children = [list(c) for c in self.children]
        t.post = self.post
        t.level = self.level
        t.size = self.size
        t.by_post = self.by_post
        t._first = self._first
        t._sparse = self._sparse
        t.n_vertices = self.n_vertices
        return t

    def rebuild_indices(self) -> None:
        """Recompute post, level, size and the LCA table from parent/children."""
        cap = len(self.parent)
        post = [0] * cap
        level = [0] * cap
        size = [0] * cap
        first = [0] * cap
        by_post = [NO_PARENT]
        euler: list[int] = []
        children = self.children
        root = self.root
        seen = [False] * cap
        # iterative walk: (vertex, index of next child)
        stack = [(root, 0)]
        seen[root] = True
        first[root] = 0
        euler.append(root)
        while stack:
            v, i = stack[-1]
            kids = children[v]
            if i < len(kids):
                stack[-1] = (v, i + 1)
                c = kids[i]
                if seen[c]:
                    raise TreeError(f"vertex {c} reached twice: parent links contain a cycle")
                if self.parent[c] != v:
                    raise TreeError(f"child list of {v} contains {c} whose parent is {self.parent[c]}")
                seen[c] = True
                level[c] = level[v] + 1
                first[c] = len(euler)
                euler.append(c)
                stack.append((c, 0))
            else:
                stack.pop()
                s = 1
                for c in kids:
                    s += size[c]
                size[v] = s
                by_post.append(v)
                post[v] = len(by_post) - 1
                if stack:
                    euler.append(stack[-1][0])
        for v in range(cap):
            if v != root and self.parent[v] != NO_PARENT and not seen[v]:
                raise TreeError(f"vertex {v} is not reachable from the root: cycle in parent links")
        self.post = post
        self.level = level
        self.size = size
        self.by_post = by_post
        self.n_vertices = len(by_post) - 1
        self._first = first
        self._sparse = _sparse_table(euler, level)

    # -- basic predicates ---------------------------------------------

    def contains(self, v: int) -> bool:
        return 0 <= v < len(self.post) and self.post[v] > 0

    def vertices(self) -> list[int]:
        return sorted(self.by_post[1:])

    def is_ancestor(self, a: int, d: int) -> bool:
        """True when ``a`` is an ancestor of ``d`` (or equal)."""
        pa = self.post[a]
        pd = self.post[d]
        return pa - self.size[a] < pd <= pa

    def lca(self, x: int, y: int) -> int:
        if x == y:
            return x
        l = self._first[x]
        r = self._first[y]
        if l > r:
            l, r = r, l
        k = (r - l + 1).bit_length() - 1
        row = self._sparse[k]
        a = row[l]
        b = row[r - (1 << k) + 1]
        return a if self.level[a] <= self.level[b] else b

    def is_back_edge(self, x: int, y: int) -> bool:
        """True when ``(x, y)`` joins an ancestor-descendant pair."""
        return self.is_ancestor(x, y) or self.is_ancestor(y, x)

    def on_path(self, x: int, p: TreePath) -> bool:
        self._check_path(p)
        return self.is_ancestor(p.top, x) and self.is_ancestor(x, p.bottom)

    def child_containing(self, y: int, x: int) -> int | None:
        """Child of ``y`` whose subtree holds ``x``; None if ``x`` is not below ``y``."""
        if x == y or not self.is_ancestor(y, x):
            return None
        kids = self.children[y]
        # children appear in increasing post order
        px = self.post[x]
        lo, hi = 0, len(kids)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.post[kids[mid]] < px:
                lo = mid + 1
            else:
                hi = mid
        return kids[lo]

    def subtree_vertices(self, w: int) -> list[int]:
        p = self.post[w]
        return self.by_post[p - self.size[w] + 1: p + 1]

    def path_vertices(self, p: TreePath) -> list[int]:
        """Vertices from top down to bottom."""
        self._check_path(p)
        out = []
        v = p.bottom
        while v != p.top:
            out.append(v)
            v = self.parent[v]
        out.append(p.top)
        out.reverse()
        return out

    def path_length(self, p: TreePath) -> int:
        """Number of vertices on the path."""
        self._check_path(p)
        return self.level[p.bottom] - self.level[p.top] + 1

    def farther_end(self, p: TreePath, frm: int) -> int:
        """Endpoint farther from ``frm`` (on the path); ties go to the top."""
        if not self.on_path(frm, p):
            raise TreeError(f"vertex {frm} is not on path {tuple(p)}")
        up = self.level[frm] - self.level[p.top]
        down = self.level[p.bottom] - self.level[frm]
        return p.top if up >= down else p.bottom

    def subtrees_hanging_from(self, p: TreePath) -> list[int]:
        """Roots of subtrees whose parent lies on ``p`` but which are off ``p``."""
        verts = self.path_vertices(p)
        out = []
        for i, v in enumerate(verts):
            nxt = verts[i + 1] if i + 1 < len(verts) else None
            for c in self.children[v]:
                if c != nxt:
                    out.append(c)
        return out

    def ancestor_at_level(self, v: int, lev: int) -> int:
        """Walk up from ``v`` to the ancestor on level ``lev``."""
        if lev > self.level[v] or lev < 0:
            raise TreeError(f"no ancestor of {v} on level {lev}")
        while self.level[v] > lev:
            v = self.parent[v]
        return v

    def _check_path(self, p: TreePath) -> None:
        if not (self.contains(p.top) and self.contains(p.bottom) and self.is_ancestor(p.top, p.bottom)):
            raise TreeError(f"{tuple(p)} is not an ancestor-descendant path")

    # -- output ----------------------------------------------------------

    def format(self) -> str:
        """``v parent`` lines sorted by id; the root prints its own id as parent."""
        lines = []
        for v in self.vertices():
            p = v if v == self.root else self.parent[v]
            lines.append(f"{v} {p}")
        return "\n".join(lines) + "\n"


def _sparse_table(euler: list[int], level: list[int]) -> list[list[int]]:
    """Range-minimum table over the Euler tour, keyed by vertex level."""
    cur = np.asarray(euler, dtype=np.int64)
    lev = np.asarray(level, dtype=np.int64)
    rows = [cur.tolist()]
    total = len(cur)
    h = 1
    while 2 * h <= total:
        a = cur[:-h]
        b = cur[h:]
        cur = np.where(lev[a] <= lev[b], a, b)
        rows.append(cur.tolist())
        h *= 2
    return rows


def default_order(v: int) -> float:
    """Ascending id with the pseudo root visited last."""
    return v if v != PSEUDO_ROOT else float("inf")


def static_dfs(
    g: DynamicGraph,
    root: int = PSEUDO_ROOT,
    order: Callable[[int], float] | None = None,
    skip_pseudo: bool = False,
) -> DfsTree:
    """Iterative DFS of ``g`` from ``root``.

    Neighbours are explored in ascending ``order`` key (default ascending id,
    pseudo root last). With ``skip_pseudo`` the pseudo root and its edges are
    ignored, which is handy for small examples rooted at a real vertex.
    """
    key = order or default_order
    cap = g.capacity
    parent = [NO_PARENT] * cap
    children: list[list[int]] = [[] for _ in range(cap)]
    seen = [False] * cap
    seen[root] = True
    if skip_pseudo:
        seen[PSEUDO_ROOT] = True

    def nbrs(v: int) -> list[int]:
        return sorted(g.adj[v], key=key)

    stack = [(root, nbrs(root), 0)]
    while stack:
        v, ns, i = stack[-1]
        while i < len(ns) and seen[ns[i]]:
            i += 1
        if i == len(ns):
            stack.pop()
            continue
        c = ns[i]
        stack[-1] = (v, ns, i + 1)
        seen[c] = True
        parent[c] = v
        children[v].append(c)
        stack.append((c, nbrs(c), 0))
    return DfsTree(root, parent, children)


def iter_tree_edges(t: DfsTree) -> Iterable[tuple[int, int]]:
    for v in t.by_post[1:]:
        if v != t.root:
            yield t.parent[v], v
