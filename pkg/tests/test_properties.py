import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dyndfs.graph import PSEUDO_ROOT, DynamicGraph, GraphError
from dyndfs.harness import random_update
from dyndfs.metrics import batch_bound
from dyndfs.oracles import BruteForceScanner, oracle_validity
from dyndfs.reduction import Engine
from dyndfs.reroot import Rerooter
from dyndfs.structure_d import MemoryBackend, StreamBackend, StructureD, descendant_vertices, query_one
from dyndfs.tree import static_dfs
from tests.conftest import random_dfs_tree, random_query

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graphs(draw, max_n=14):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return DynamicGraph.from_edge_list(n, edges)


seeds = st.integers(0, 2**32 - 1)

ops = st.lists(
    st.tuples(st.sampled_from(["ie", "de", "iv", "dv"]), st.integers(0, 30), st.integers(0, 30),
              st.lists(st.integers(0, 30), max_size=5, unique=True)),
    max_size=40,
)


def _graph_invariants(g):
    live = set(g.vertices())
    assert g.adj[PSEUDO_ROOT] == live
    for u in live:
        assert PSEUDO_ROOT in g.adj[u]
        for v in g.adj[u]:
            assert u in g.adj[v]
            assert v == PSEUDO_ROOT or v in live
    assert 2 * g.m == sum(len(g.adj[u]) - 1 for u in live)
    assert len(g.edge_list()) == g.m + g.n


@SETTINGS
@given(graphs(), ops)
def test_graph_invariants_survive_any_op_sequence(g, seq):
    for kind, a, b, nbrs in seq:
        try:
            if kind == "ie":
                g.insert_edge(a, b)
            elif kind == "de":
                g.delete_edge(a, b)
            elif kind == "iv":
                g.insert_vertex(a, nbrs)
            else:
                g.delete_vertex(a)
        except GraphError:
            pass
        _graph_invariants(g)


@SETTINGS
@given(graphs(), seeds)
def test_tree_index_invariants(g, seed):
    rng = random.Random(seed)
    t = random_dfs_tree(rng, g)
    vs = t.vertices()
    assert sorted(t.post[v] for v in vs) == list(range(1, len(vs) + 1))
    for v in vs:
        assert t.size[v] == 1 + sum(t.size[c] for c in t.children[v])
        if v != t.root:
            assert t.level[v] == t.level[t.parent[v]] + 1
    for u, v in g.edge_list():
        assert t.lca(u, v) in (u, v)
    for _ in range(20):
        a, d = rng.choice(vs), rng.choice(vs)
        walk = d
        while walk != a and walk != t.root:
            walk = t.parent[walk]
        assert t.is_ancestor(a, d) == (walk == a)
        lo = t.post[a] - t.size[a]
        assert t.is_ancestor(a, d) == (lo < t.post[d] <= t.post[a])


@SETTINGS
@given(graphs(), seeds)
def test_query_one_equals_brute_force(g, seed):
    rng = random.Random(seed)
    if g.n == 0:
        return
    t = random_dfs_tree(rng, g)
    d, bf = StructureD(t, g), BruteForceScanner(g, t)
    for _ in range(30):
        q = random_query(rng, t)
        assert query_one(d, q) == bf.query(q)


@SETTINGS
@given(graphs(), seeds)
def test_backends_agree_on_independent_batches(g, seed):
    rng = random.Random(seed)
    if g.n == 0:
        return
    t = random_dfs_tree(rng, g)
    mem, stream = MemoryBackend(StructureD(t, g)), StreamBackend(t, g.edge_list())
    for _ in range(5):
        used, batch = set(), []
        for _ in range(8):
            q = random_query(rng, t)
            vs = set(descendant_vertices(t, q))
            if not vs & used:
                used |= vs
                batch.append(q)
        assert mem.run_batch(batch) == stream.run_batch(batch)
    assert stream.passes == stream.batches == 5


@SETTINGS
@given(graphs(max_n=20), seeds)
def test_any_subtree_reroots_to_a_valid_tree(g, seed):
    rng = random.Random(seed)
    if g.n == 0:
        return
    t = random_dfs_tree(rng, g)
    # a child subtree of the pseudo root can hang from 0 at any new root
    r0 = rng.choice(t.children[PSEUDO_ROOT])
    r_star = rng.choice(t.subtree_vertices(r0))
    rr = Rerooter(t, MemoryBackend(StructureD(t, g)).run_batch, g, instrument=True)
    res = rr.reroot(r0, r_star, PSEUDO_ROOT)
    assert sorted(res.order) == sorted(t.subtree_vertices(r0))
    assert res.stats.batches <= batch_bound(t.size[r0])
    parent = list(t.parent)
    for v, p in res.parent.items():
        parent[v] = p
    from dyndfs.tree import DfsTree
    assert oracle_validity(g, DfsTree.from_parent(0, parent))


@SETTINGS
@given(graphs(max_n=16), st.integers(0, 2**32 - 1), st.floats(0.05, 0.6))
def test_engine_keeps_a_dfs_tree(g, seed, density):
    rng = random.Random(seed)
    eng = Engine(g, instrument=True)
    for _ in range(15):
        _, m = eng.apply_update(random_update(rng, eng.g, density))
        assert m.valid is True
        assert m.reduction_batches <= 4
