import random

import pytest

from dyndfs.graph import DynamicGraph
from dyndfs.structure_d import EdgeQuery, PATH, SUBTREE, TOP, BOTTOM
from dyndfs.tree import TreePath, static_dfs

F1_EDGES = [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (2, 5)]
H1_EDGES = [(1, 2), (2, 3), (3, 4), (1, 5), (3, 6)]
TRIANGLE = [(1, 2), (2, 3), (1, 3)]
K4 = [(u, v) for u in range(1, 5) for v in range(u + 1, 5)]


@pytest.fixture
def f1():
    return DynamicGraph.from_edge_list(5, F1_EDGES)


@pytest.fixture
def triangle():
    return DynamicGraph.from_edge_list(3, TRIANGLE)


@pytest.fixture
def h1():
    return DynamicGraph.from_edge_list(6, H1_EDGES)


def random_dfs_tree(rng: random.Random, g: DynamicGraph):
    """A DFS tree of ``g`` from the pseudo root under a random neighbour order."""
    keys = {v: rng.random() for v in range(g.capacity)}
    return static_dfs(g, order=keys.__getitem__)


def random_query(rng: random.Random, t) -> EdgeQuery:
    """A well-formed query: target is an ancestor-descendant path, part is disjoint from it."""
    verts = t.vertices()
    while True:
        bottom = rng.choice(verts)
        chain = [bottom]
        while chain[-1] != t.root:
            chain.append(t.parent[chain[-1]])
        top = rng.choice(chain)
        target = set(t.path_vertices(TreePath(top, bottom)))
        end = rng.choice((TOP, BOTTOM))
        kind = rng.randrange(3)
        w = rng.choice(verts)
        if kind == 0 and w not in target:
            return EdgeQuery.vertex(w, top, bottom, end)
        if kind == 1 and not t.is_ancestor(w, bottom) and w != t.root:
            return EdgeQuery.subtree(w, top, bottom, end)
        if kind == 2:
            up = [w]
            while up[-1] != t.root:
                up.append(t.parent[up[-1]])
            a = rng.choice(up)
            part = set(t.path_vertices(TreePath(a, w)))
            if not part & target:
                return EdgeQuery.path(a, w, top, bottom, end)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            for name, value in rep.user_properties:
                if name == "acceptance":
                    rows.append(value)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(rows):
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
