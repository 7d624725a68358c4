"""Mutable undirected graph with a pseudo root adjacent to every live vertex."""

from __future__ import annotations

from typing import Iterable, Iterator

PSEUDO_ROOT = 0


class GraphError(ValueError):
    """Rejected graph input or infeasible update."""


class DynamicGraph:
    """Simple undirected graph on integer ids.

    Vertex 0 is the pseudo root. It is adjacent to every live vertex and its
    edges are real edges of the augmented graph, so they show up in
    ``edge_list`` and in every neighbour set.
    """

    __slots__ = ("adj", "live", "m", "_edges", "_edge_pos", "_used")

    def __init__(self) -> None:
        self.adj: list[set[int]] = [set()]
        self.live: list[bool] = [True]
        self.m = 0  # edges not touching the pseudo root
        # edge list of the augmented graph, kept for linear scans
        self._edges: list[tuple[int, int]] = []
        self._edge_pos: dict[tuple[int, int], int] = {}
        self._used: list[bool] = [True]

    # -- construction -------------------------------------------------

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DynamicGraph":
        if n < 0:
            raise GraphError(f"negative vertex count {n}")
        g = cls()
        for v in range(1, n + 1):
            g._add_vertex(v)
        for k, (u, v) in enumerate(edges):
            where = f"edge {k + 1} ({u}, {v})"
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphError(f"{where}: endpoint out of range 1..{n}")
            if u == v:
                raise GraphError(f"{where}: self-loop")
            if v in g.adj[u]:
                raise GraphError(f"{where}: duplicate edge")
            g._link(u, v)
            g.m += 1
        return g

    def copy(self) -> "DynamicGraph":
        g = DynamicGraph.__new__(DynamicGraph)
        g.adj = [set(s) for s in self.adj]
        g.live = list(self.live)
        g.m = self.m
        g._edges = list(self._edges)
        g._edge_pos = dict(self._edge_pos)
        g._used = list(self._used)
        return g

    # -- low-level helpers --------------------------------------------

    def _grow(self, u: int) -> None:
        while len(self.adj) <= u:
            self.adj.append(set())
            self.live.append(False)
            self._used.append(False)

    def _add_vertex(self, u: int) -> None:
        self._grow(u)
        self.live[u] = True
        self._used[u] = True
        self._link(PSEUDO_ROOT, u)

    def _link(self, u: int, v: int) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)
        key = (u, v) if u < v else (v, u)
        self._edge_pos[key] = len(self._edges)
        self._edges.append(key)

    def _unlink(self, u: int, v: int) -> None:
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        key = (u, v) if u < v else (v, u)
        pos = self._edge_pos.pop(key)
        last = self._edges.pop()
        if last != key:
            self._edges[pos] = last
            self._edge_pos[last] = pos

    def _check_live(self, u: int) -> None:
        if u == PSEUDO_ROOT:
            raise GraphError("the pseudo root cannot be updated")
        if not self.is_live(u):
            raise GraphError(f"vertex {u} is not live")

    # -- queries --------------------------------------------------------

    def is_live(self, u: int) -> bool:
        return 0 <= u < len(self.live) and self.live[u]

    def has_edge(self, u: int, v: int) -> bool:
        return self.is_live(u) and v in self.adj[u]

    @property
    def n(self) -> int:
        """Live vertex count, pseudo root excluded."""
        return len(self.adj[PSEUDO_ROOT])

    @property
    def capacity(self) -> int:
        """One past the largest id ever used."""
        return len(self.adj)

    def vertices(self) -> list[int]:
        """Live vertices in ascending order, pseudo root excluded."""
        return [v for v in range(1, len(self.live)) if self.live[v]]

    def neighbors(self, u: int) -> set[int]:
        return self.adj[u]

    def edges(self, include_root: bool = False) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` pairs with ``u < v``."""
        for e in self._edges:
            if include_root or e[0] != PSEUDO_ROOT:
                yield e

    def edge_list(self) -> list[tuple[int, int]]:
        """Edge list of the augmented graph (the stream the scanners read)."""
        return self._edges

    def is_unused_id(self, u: int) -> bool:
        return u > 0 and (u >= len(self._used) or not self._used[u])

    # -- updates --------------------------------------------------------

    def insert_edge(self, u: int, v: int) -> None:
        self._check_live(u)
        self._check_live(v)
        if u == v:
            raise GraphError(f"self-loop on {u}")
        if v in self.adj[u]:
            raise GraphError(f"edge ({u}, {v}) already present")
        self._link(u, v)
        self.m += 1

    def delete_edge(self, u: int, v: int) -> None:
        self._check_live(u)
        self._check_live(v)
        if v not in self.adj[u]:
            raise GraphError(f"edge ({u}, {v}) not present")
        self._unlink(u, v)
        self.m -= 1

    def insert_vertex(self, u: int, neighbors: Iterable[int]) -> None:
        nbrs = list(neighbors)
        if not self.is_unused_id(u):
            raise GraphError(f"vertex id {u} is live or retired")
        if len(set(nbrs)) != len(nbrs):
            raise GraphError(f"duplicate neighbour for new vertex {u}")
        for v in nbrs:
            if v == u:
                raise GraphError(f"self-loop on {u}")
            self._check_live(v)
        self._add_vertex(u)
        for v in nbrs:
            self._link(u, v)
        self.m += len(nbrs)

    def delete_vertex(self, u: int) -> list[int]:
        """Remove ``u``; returns its former non-root neighbours (ascending)."""
        self._check_live(u)
        nbrs = sorted(v for v in self.adj[u] if v != PSEUDO_ROOT)
        for v in nbrs:
            self._unlink(u, v)
        self._unlink(PSEUDO_ROOT, u)
        self.live[u] = False
        self.m -= len(nbrs)
        return nbrs


    # -- rollback of a rejected update ----------------------------------

    def undo_insert_vertex(self, u: int) -> None:
        self.delete_vertex(u)
        self._used[u] = False

    def undo_delete_vertex(self, u: int, neighbors: Iterable[int]) -> None:
        if self.live[u]:
            raise GraphError(f"vertex {u} is live")
        nbrs = list(neighbors)
        self._add_vertex(u)
        for v in nbrs:
            self._link(u, v)
        self.m += len(nbrs)


def parse_graph(text: str) -> DynamicGraph:
    """Parse the ``n m`` header plus ``u v`` lines format."""
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two integers, got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: expected two integers, got {line!r}") from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphError(f"line {lineno}: negative header value")
            header = (a, b)
        else:
            edges.append((a, b))
            lines.append(lineno)
    if header is None:
        raise GraphError("missing 'n m' header line")
    n, m = header
    if len(edges) != m:
        raise GraphError(f"header declares {m} edges but {len(edges)} were given")
    g = DynamicGraph.from_edge_list(n, [])
    for (u, v), lineno in zip(edges, lines):
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphError(f"line {lineno}: endpoint out of range 1..{n}")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on {u}")
        if g.has_edge(u, v):
            raise GraphError(f"line {lineno}: duplicate edge ({u}, {v})")
        g.insert_edge(u, v)
    return g


def format_graph(g: DynamicGraph) -> str:
    """Inverse of ``parse_graph`` for graphs whose live ids are 1..n."""
    edges = list(g.edges())
    out = [f"{g.n} {len(edges)}"]
    out.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"
