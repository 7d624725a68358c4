import random

import pytest

from dyndfs.graph import DynamicGraph
from dyndfs.harness import random_graph
from dyndfs.oracles import oracle_ref_dfs
from dyndfs.tree import NO_PARENT, DfsTree, TreeError, TreePath, static_dfs
from tests.conftest import random_dfs_tree


def chain_tree(n: int) -> DfsTree:
    # 0 - 1 - 2 - ... - n
    return DfsTree.from_parent(0, [NO_PARENT] + list(range(n)))


def f1_plus_six() -> DfsTree:
    # F1 chain with an extra child 6 under 2
    return DfsTree.from_parent(0, [NO_PARENT, 0, 1, 2, 3, 4, 2])


def test_triangle_from_one(triangle):
    t = static_dfs(triangle, root=1, skip_pseudo=True)
    assert t.parent[2] == 1 and t.parent[3] == 2
    assert t.is_back_edge(1, 3)


def test_single_vertex():
    g = DynamicGraph.from_edge_list(1, [])
    t = static_dfs(g, root=1, skip_pseudo=True)
    assert t.vertices() == [1]
    assert t.size[1] == 1


def test_f1_is_a_chain(f1):
    t = static_dfs(f1, root=1, skip_pseudo=True)
    assert [t.parent[v] for v in range(2, 6)] == [1, 2, 3, 4]
    assert t.is_back_edge(1, 5) and t.is_back_edge(2, 5)


def test_chain_indices():
    t = DfsTree.from_parent(1, [NO_PARENT, NO_PARENT, 1, 2])
    assert [t.post[v] for v in (3, 2, 1)] == [1, 2, 3]
    assert [t.level[v] for v in (1, 2, 3)] == [0, 1, 2]
    assert [t.size[v] for v in (1, 2, 3)] == [3, 2, 1]


def test_star_post_order():
    t = DfsTree.from_parent(1, [NO_PARENT, NO_PARENT, 1, 1])
    assert [t.post[v] for v in (2, 3, 1)] == [1, 2, 3]


def test_root_children_sizes_sum(f1):
    t = static_dfs(f1)
    assert sum(t.size[c] for c in t.children[t.root]) == t.n_vertices - 1


def test_rebuild_rejects_cycles():
    with pytest.raises(TreeError):
        DfsTree(0, [NO_PARENT, 2, 1], [[], [2], [1]])


def test_lca_examples():
    t = chain_tree(3)
    assert t.lca(2, 2) == 2
    assert t.lca(3, 2) == 2
    assert f1_plus_six().lca(3, 6) == 2


def test_f1_predicates(f1):
    t = static_dfs(f1)
    assert t.is_back_edge(2, 5)
    u = f1_plus_six()
    assert not u.is_back_edge(3, 6)
    assert t.child_containing(2, 5) == 3
    assert t.child_containing(5, 2) is None
    assert t.farther_end(TreePath(2, 5), 3) == 5
    assert t.subtrees_hanging_from(TreePath(1, 3)) == [4]
    assert sorted(u.subtrees_hanging_from(TreePath(1, 3))) == [4, 6]


def test_farther_end_tie_goes_up():
    t = chain_tree(5)
    assert t.farther_end(TreePath(1, 5), 3) == 1
    assert t.path_length(TreePath(1, 5)) == 5


def test_bad_path_rejected():
    t = f1_plus_six()
    with pytest.raises(TreeError):
        t.path_vertices(TreePath(3, 6))


def test_format_prints_root_as_own_parent(triangle):
    assert static_dfs(triangle).format() == "0 0\n1 0\n2 1\n3 2\n"


def test_static_dfs_matches_reference_dfs():
    for seed in range(200):
        rng = random.Random(seed)
        g = random_graph(rng, rng.randint(1, 40), rng.uniform(0.02, 0.6))
        a, b = static_dfs(g), oracle_ref_dfs(g)
        assert a.parent == b.parent and a.children == b.children


def test_static_dfs_output_has_no_cross_edges():
    for seed in range(100):
        rng = random.Random(seed)
        g = random_graph(rng, rng.randint(1, 60), rng.uniform(0.02, 0.5))
        t = random_dfs_tree(rng, g)
        for u, v in g.edge_list():
            assert t.lca(u, v) in (u, v)


def _naive_lca(t, x, y):
    up = {x}
    while x != t.root:
        x = t.parent[x]
        up.add(x)
    while y not in up:
        y = t.parent[y]
    return y


def test_lca_and_ancestry_against_parent_chains():
    rng = random.Random(7)
    for _ in range(10):
        g = random_graph(rng, rng.randint(20, 120), rng.uniform(0.01, 0.1))
        t = random_dfs_tree(rng, g)
        vs = t.vertices()
        for _ in range(1000):
            x, y = rng.choice(vs), rng.choice(vs)
            assert t.lca(x, y) == _naive_lca(t, x, y)
            assert t.is_ancestor(x, y) == (_naive_lca(t, x, y) == x)
