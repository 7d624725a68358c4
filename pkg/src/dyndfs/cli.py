"""Command-line front end: build, update and bench."""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path
from typing import TextIO

from .graph import GraphError, parse_graph
from .harness import HarnessFailure, random_harness
from .metrics import batch_bound
from .reduction import Engine, UpdateError, ValidityError, parse_updates

EXIT_INPUT = 1  # unreadable or malformed input, infeasible update
EXIT_VIOLATION = 3  # a tree failed verification or an internal bound tripped

BENCH_FIELDS = ["n", "mean_batches", "max_batches", "bound", "mean_passes", "mean_wall_time"]


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_INPUT) -> None:
        super().__init__(msg)
        self.code = code


def _read(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {what} {path}: {e.strerror}") from None


@contextlib.contextmanager
def _sink(path: str | None):
    """Yield a text stream for ``path``; ``None`` or ``-`` means stdout."""
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="") as fh:
        yield fh


@contextlib.contextmanager
def _optional(path: str | None):
    if path is None:
        yield None
        return
    with open(path, "w") as fh:
        yield fh


def _engine(args, trace: TextIO | None) -> Engine:
    try:
        g = parse_graph(_read(args.graph, "graph file"))
    except GraphError as e:
        raise CliError(f"{args.graph}: {e}") from None
    return Engine(g, backend=args.backend, instrument=args.instrument, verify=args.verify, trace=trace)


def cmd_build(args) -> int:
    with _optional(args.trace_out) as trace:
        eng = _engine(args, trace)
    with _sink(args.out) as out:
        out.write(eng.t.format())
    return 0


def cmd_update(args) -> int:
    try:
        updates = parse_updates(_read(args.updates, "update file"))
    except UpdateError as e:
        raise CliError(f"{args.updates}: {e}") from None
    with _optional(args.trace_out) as trace, _optional(args.metrics_out) as mout:
        eng = _engine(args, trace)
        records = []
        for step, up in enumerate(updates):
            try:
                _, m = eng.apply_update(up)
            except UpdateError as e:
                raise CliError(f"step {step}: rejected: {e}") from None
            except (ValidityError, RuntimeError) as e:
                raise CliError(f"step {step}: {e}", EXIT_VIOLATION) from None
            rec = {"step": step, "update": str(up), "valid": m.valid, "metrics": m.as_dict()}
            if not args.timings:
                rec["metrics"].pop("wall_time")
            records.append(rec)
            if mout is not None:
                mout.write(json.dumps(rec, sort_keys=True) + "\n")
        if mout is not None:
            mout.write(json.dumps({"summary": _update_summary(records)}, sort_keys=True) + "\n")
    with _sink(args.out) as out:
        out.write(eng.t.format())
    return 0


def _update_summary(records: list[dict]) -> dict:
    batches = [r["metrics"]["query_batches"] for r in records]
    return {
        "updates": len(records),
        "all_valid": all(r["valid"] is not False for r in records),
        "verified": sum(r["valid"] is True for r in records),
        "max_batches": max(batches, default=0),
        "mean_batches": sum(batches) / len(batches) if batches else 0.0,
        "passes": sum(r["metrics"]["passes"] for r in records),
    }


def bench_rows(
    sizes: list[int],
    density: float,
    updates: int,
    runs: int,
    seed: int,
    backend: str = "memory",
    verify: bool = False,
    instrument: bool = False,
) -> list[dict]:
    """One row per size, aggregated over ``runs`` seeded harness sequences."""
    rows = []
    for n in sizes:
        batches: list[int] = []
        passes: list[int] = []
        times: list[float] = []
        for r in range(runs):
            rep = random_harness(seed + r, n, density, updates, backend=backend, instrument=instrument, verify=verify)
            for rec in rep.records:
                m = rec["metrics"]
                batches.append(m["query_batches"])
                passes.append(m["passes"])
                times.append(m["wall_time"])
        k = max(len(batches), 1)
        rows.append({
            "n": n,
            "mean_batches": sum(batches) / k,
            "max_batches": max(batches, default=0),
            "bound": batch_bound(n),
            "mean_passes": sum(passes) / k,
            "mean_wall_time": sum(times) / k,
        })
    return rows


def write_bench_csv(rows: list[dict], out: TextIO) -> None:
    w = csv.DictWriter(out, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})


def plot_bench(rows: list[dict], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, [r["bound"] for r in rows], "k--", label="bound 12(ceil(log2 n)+1)^2")
    ax.plot(ns, [r["max_batches"] for r in rows], "o-", label="max batches per update")
    ax.plot(ns, [r["mean_batches"] for r in rows], "s-", label="mean batches per update")
    ax.plot(ns, [r["mean_passes"] for r in rows], "x:", label="mean passes per update")
    ax.set_xscale("log", base=2)
    ax.set_yscale("symlog", linthresh=1)
    ax.set_xlabel("n")
    ax.set_ylabel("count")
    ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise CliError(f"--sizes expects comma-separated integers, got {args.sizes!r}") from None
    if not sizes or min(sizes) < 1:
        raise CliError("--sizes needs at least one positive size")
    try:
        rows = bench_rows(sizes, args.density, args.updates, args.runs, args.seed,
                          backend=args.backend, verify=args.verify, instrument=args.instrument)
    except HarnessFailure as e:
        raise CliError(f"bench run failed at {e.token}: {e.cause}", EXIT_VIOLATION) from None
    with _sink(args.out) as out:
        write_bench_csv(rows, out)
    plot = args.plot
    if plot is None and args.out not in (None, "-"):
        plot = str(Path(args.out).with_suffix(".png"))
    if plot:
        plot_bench(rows, plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyndfs", description="Maintain a DFS tree of a graph under updates.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=["memory", "stream"], default="memory")
    common.add_argument("--verify", action="store_true", help="check every tree against the validity oracle")
    common.add_argument("--instrument", action="store_true", help="assert structural invariants while rerooting")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trace-out", metavar="PATH", help="JSON lines: a record per query batch and per traversal")
    sub = p.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", parents=[common], help="write the initial DFS tree")
    b.add_argument("graph")
    b.add_argument("-o", "--out", metavar="PATH", help="tree file (default stdout)")
    b.set_defaults(func=cmd_build)

    u = sub.add_parser("update", parents=[common], help="apply an update stream, write the final tree")
    u.add_argument("graph")
    u.add_argument("updates")
    u.add_argument("-o", "--out", metavar="PATH", help="tree file (default stdout)")
    u.add_argument("--metrics-out", metavar="PATH", help="JSON lines, one record per update plus a summary")
    u.add_argument("--timings", action="store_true", help="include wall times in the metrics records")
    u.set_defaults(func=cmd_update)

    c = sub.add_parser("bench", parents=[common], help="batch and pass counts across graph sizes")
    c.add_argument("--sizes", default="8,16,32,64,128")
    c.add_argument("--density", type=float, default=0.1)
    c.add_argument("--updates", type=int, default=50, help="updates per sequence")
    c.add_argument("--runs", type=int, default=5, help="sequences per size")
    c.add_argument("-o", "--out", metavar="PATH", help="CSV file (default stdout)")
    c.add_argument("--plot", metavar="PATH", help="PNG figure (default: next to --out)")
    c.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"dyndfs {args.cmd}: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
