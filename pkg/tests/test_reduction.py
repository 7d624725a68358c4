import random

import pytest

from dyndfs.graph import DynamicGraph
from dyndfs.harness import random_graph, random_update
from dyndfs.oracles import oracle_enum_dfs, oracle_validity, tree_signature
from dyndfs.reduction import (
    Engine, RerootTask, Update, UpdateError, parse_update, parse_updates, plan_update,
)
from dyndfs.structure_d import MemoryBackend, StructureD
from dyndfs.tree import static_dfs


def _plan(g, up):
    t = static_dfs(g)
    d = StructureD(t, g)
    if up.kind == "de":
        d.remove_edge(up.u, up.v)
        g.delete_edge(up.u, up.v)
    elif up.kind == "ie":
        g.insert_edge(up.u, up.v)
    elif up.kind == "dv":
        for x in d.sorted_neighbors(up.u):
            d.remove_edge(up.u, x)
        g.delete_vertex(up.u)
    else:
        g.insert_vertex(up.u, up.nbrs)
    return plan_update(up, t, g, MemoryBackend(d).run_batch)


def test_parse_update_forms():
    assert parse_updates("ie 1 2\nde 2 3 # drop\n\niv 7 1 2\ndv 4\n") == [
        Update("ie", 1, 2), Update("de", 2, 3), Update("iv", 7, nbrs=(1, 2)), Update("dv", 4),
    ]
    assert str(Update("iv", 7, nbrs=(1, 2))) == "iv 7 1 2"


@pytest.mark.parametrize("line", ["ie 1", "xx 1 2", "dv 1 2", "de a b", "iv"])
def test_parse_update_rejects(line):
    with pytest.raises(UpdateError, match="line 3"):
        parse_update(line, 3)


def test_back_edge_insert_has_no_tasks(triangle):
    triangle.delete_edge(1, 3)
    p = _plan(triangle, Update("ie", 1, 3))
    assert p.kind == "ie-back" and p.tasks == [] and not p.changes_tree


def test_tree_edge_delete_in_triangle(triangle):
    p = _plan(triangle, Update("de", 2, 3))
    assert p.kind == "de-tree"
    assert p.tasks == [RerootTask(3, 3, 1)]
    assert p.batches == 1


def test_leaf_delete_has_no_tasks(triangle):
    p = _plan(triangle, Update("dv", 3))
    assert p.tasks == [] and p.removed == 3


def test_cross_insert_reroots_child_subtree_of_lca():
    # 0-1-{2,3}: edge (2,3) is a cross edge; lca 1, reroot T(3) at 3 from 2
    g = DynamicGraph.from_edge_list(3, [(1, 2), (1, 3)])
    p = _plan(g, Update("ie", 2, 3))
    assert p.kind == "ie-cross" and p.tasks == [RerootTask(3, 3, 2)]


def test_vertex_insert_attaches_at_smallest_post_rank():
    # 0-1-{2,3}; new 4 adjacent to 2 and 3; post(2) < post(3) so 4 hangs from 2
    g = DynamicGraph.from_edge_list(3, [(1, 2), (1, 3)])
    p = _plan(g, Update("iv", 4, nbrs=(2, 3)))
    assert p.added == (4, 2)
    assert p.tasks == [RerootTask(3, 3, 4)]


def test_vertex_delete_one_task_per_child():
    g = DynamicGraph.from_edge_list(5, [(1, 2), (2, 3), (2, 4), (3, 5), (1, 5), (1, 4)])
    p = _plan(g, Update("dv", 2))
    assert sorted(k.subtree_root for k in p.tasks) == [3, 4]
    assert all(k.attach_parent == 1 for k in p.tasks)


def test_f1_delete_12_reroots_at_5(f1):
    eng = Engine(f1, verify=True)
    t, m = eng.apply_update(Update("de", 1, 2))
    assert m.kind == "de-tree" and m.valid is True
    assert t.parent[5] == 1
    assert tree_signature(t) in oracle_enum_dfs(f1)


def test_one_vertex_graph_updates():
    g = DynamicGraph.from_edge_list(1, [])
    eng = Engine(g, verify=True)
    for up in [Update("iv", 2, nbrs=(1,)), Update("de", 1, 2), Update("dv", 1), Update("dv", 2)]:
        _, m = eng.apply_update(up)
        assert m.valid is True


def test_rejected_update_leaves_engine_unchanged(f1):
    eng = Engine(f1)
    before = (eng.t.format(), [list(x) for x in eng.d.nbrs], sorted(f1.edge_list()))
    for up in [Update("de", 1, 3), Update("ie", 1, 2), Update("dv", 9), Update("iv", 3, nbrs=(1,))]:
        with pytest.raises(UpdateError):
            eng.apply_update(up)
        assert (eng.t.format(), eng.d.nbrs, sorted(f1.edge_list())) == before


def test_failure_inside_execution_rolls_back(f1, monkeypatch):
    eng = Engine(f1)
    before = (eng.t.format(), [list(x) for x in eng.d.nbrs], sorted(f1.edge_list()))
    import dyndfs.reduction as red

    def boom(*a, **k):
        raise RuntimeError("injected")

    monkeypatch.setattr(red, "_splice", boom)
    with pytest.raises(RuntimeError, match="injected"):
        eng.apply_update(Update("dv", 2))
    assert (eng.t.format(), eng.d.nbrs, sorted(f1.edge_list())) == before


def test_unverified_updates_report_none():
    g = DynamicGraph.from_edge_list(3, [(1, 2)])
    _, m = Engine(g).apply_update(Update("ie", 2, 3))
    assert m.valid is None


def test_incremental_d_matches_fresh_build():
    for seed in range(60):
        rng = random.Random(seed)
        p = rng.uniform(0.05, 0.6)
        eng = Engine(random_graph(rng, rng.randint(2, 40), p))
        for _ in range(40):
            eng.apply_update(random_update(rng, eng.g, p))
            fresh = StructureD(eng.t, eng.g).nbrs
            assert [eng.d.nbrs[v] for v in range(len(fresh))] == fresh


def test_random_updates_keep_validity():
    rng = random.Random(50)
    eng = Engine(random_graph(rng, 50, 0.1), verify=True)
    for _ in range(100):
        _, m = eng.apply_update(random_update(rng, eng.g, 0.1))
        assert m.valid is True
        assert oracle_validity(eng.g, eng.t)
