import csv
import json

import pytest

from dyndfs.cli import main
from dyndfs.graph import format_graph, parse_graph
from dyndfs.oracles import oracle_ref_dfs
from tests.conftest import F1_EDGES, TRIANGLE


def write_graph(path, n, edges):
    path.write_text(f"{n} {len(edges)}\n" + "".join(f"{u} {v}\n" for u, v in edges))
    return str(path)


@pytest.fixture
def f1_file(tmp_path):
    return write_graph(tmp_path / "f1.txt", 5, F1_EDGES)


def test_build_triangle(tmp_path):
    g = write_graph(tmp_path / "t.txt", 3, TRIANGLE)
    out = tmp_path / "tree.txt"
    assert main(["build", g, "-o", str(out)]) == 0
    assert out.read_text().splitlines() == ["0 0", "1 0", "2 1", "3 2"]


def test_build_empty_graph(tmp_path, capsys):
    g = write_graph(tmp_path / "e.txt", 0, [])
    assert main(["build", g]) == 0
    assert capsys.readouterr().out == "0 0\n"


def test_build_f1_matches_reference(f1_file, capsys):
    assert main(["build", f1_file]) == 0
    g = parse_graph(open(f1_file).read())
    assert capsys.readouterr().out == oracle_ref_dfs(g).format()


def test_build_parse_error_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("3 2\n1 2\n2 2\n")
    assert main(["build", str(p)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["build", str(tmp_path / "nope.txt")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_back_edge_inserts_stay_cheap(tmp_path, capsys):
    g = write_graph(tmp_path / "p.txt", 6, [(k, k + 1) for k in range(1, 6)])
    ups = tmp_path / "u.txt"
    ups.write_text("ie 1 3\nie 1 6\nie 2 5\nie 3 6\n")
    m = tmp_path / "m.jsonl"
    assert main(["update", g, str(ups), "--verify", "--metrics-out", str(m)]) == 0
    recs = [json.loads(x) for x in m.read_text().splitlines()]
    assert recs[-1]["summary"]["updates"] == 4
    assert all(r["metrics"]["query_batches"] <= 4 and r["metrics"]["kind"] == "ie-back" for r in recs[:-1])


def test_empty_stream_is_a_no_op(f1_file, tmp_path, capsys):
    ups = tmp_path / "u.txt"
    ups.write_text("# nothing\n")
    assert main(["update", f1_file, str(ups)]) == 0
    built = capsys.readouterr().out
    main(["build", f1_file])
    assert capsys.readouterr().out == built


def test_f1_delete_passes_verify(f1_file, tmp_path, capsys):
    ups = tmp_path / "u.txt"
    ups.write_text("de 1 2\n")
    m = tmp_path / "m.jsonl"
    assert main(["update", f1_file, str(ups), "--verify", "--metrics-out", str(m)]) == 0
    first = json.loads(m.read_text().splitlines()[0])
    assert first["valid"] is True and first["step"] == 0
    assert "wall_time" not in first["metrics"]


def test_infeasible_update_names_step(f1_file, tmp_path, capsys):
    ups = tmp_path / "u.txt"
    ups.write_text("de 1 2\nde 1 2\nie 1 3\n")
    assert main(["update", f1_file, str(ups)]) == 1
    assert "step 1" in capsys.readouterr().err


def test_bad_update_line_names_line(f1_file, tmp_path, capsys):
    ups = tmp_path / "u.txt"
    ups.write_text("ie 1 3\nzz 1\n")
    assert main(["update", f1_file, str(ups)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_outputs_are_byte_identical_across_runs_and_backends(tmp_path):
    import random

    from dyndfs.harness import random_graph, random_update
    from dyndfs.reduction import Engine

    rng = random.Random(8)
    g = random_graph(rng, 25, 0.2)
    gpath = tmp_path / "g.txt"
    gpath.write_text(format_graph(g))
    sim = Engine(g.copy())
    lines = []
    for _ in range(60):
        up = random_update(rng, sim.g, 0.2)
        sim.apply_update(up)
        lines.append(str(up))
    upath = tmp_path / "u.txt"
    upath.write_text("\n".join(lines) + "\n")
    outs = []
    for k, backend in enumerate(["memory", "memory", "stream"]):
        t, m, tr = (tmp_path / f"{x}{k}" for x in "tmr")
        args = ["update", str(gpath), str(upath), "--backend", backend, "--verify",
                "-o", str(t), "--metrics-out", str(m), "--trace-out", str(tr)]
        assert main(args) == 0
        outs.append((t.read_bytes(), m.read_bytes(), tr.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][0] == outs[2][0]
    assert outs[0][2] == outs[2][2]


def _bench(tmp_path, *extra):
    out = tmp_path / "b.csv"
    assert main(["bench", "-o", str(out), *extra]) == 0
    assert out.with_suffix(".png").stat().st_size > 0
    return list(csv.DictReader(out.open()))


def test_bench_bound_column(tmp_path):
    rows = _bench(tmp_path, "--sizes", "8", "--runs", "2", "--updates", "20")
    assert rows[0]["bound"] == "192"
    assert int(rows[0]["max_batches"]) <= 192


def test_bench_stream_passes_equal_batches(tmp_path):
    rows = _bench(tmp_path, "--sizes", "8,16", "--runs", "2", "--updates", "20", "--backend", "stream")
    for r in rows:
        assert r["mean_passes"] == r["mean_batches"]


def test_bench_growth_is_polylog(tmp_path):
    rows = _bench(tmp_path, "--sizes", "64,128", "--runs", "8", "--updates", "50", "--seed", "0")
    a, b = (int(r["max_batches"]) for r in rows)
    print(f"max-batch growth 64->128: {b / a:.3f} (log-squared ratio {(8 / 7) ** 2:.3f})")
    assert b / a <= (8 / 7) ** 2
    assert all(int(r["max_batches"]) <= int(r["bound"]) for r in rows)


def test_bench_rejects_bad_sizes(capsys):
    assert main(["bench", "--sizes", "a,b"]) == 1
    assert "--sizes" in capsys.readouterr().err
