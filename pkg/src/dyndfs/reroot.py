"""Reroot a subtree of a DFS tree through phases and stages of components.

Every unvisited component is either a single subtree (C1) or one tree path
plus subtrees that each have an edge to it (C2). A traversal walks part of a
component, appends the walk to the new tree, and regroups what is left into
new C1/C2 components. Each new component hangs from the lowest edge it has
onto the freshly appended walk, which keeps every non-tree edge a back edge.

Traversals are generators. They yield lists of edge queries and receive the
answers, so the stage scheduler can merge the queries of all components that
are active at the same time into one batch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Generator, Iterable, Sequence, TextIO

from .graph import DynamicGraph
from .metrics import RerootStats, batch_bound, ceil_log2
from .structure_d import (
    BOTTOM, PATH, SUBTREE, TOP, VERTEX, Edge, EdgeQuery,
)
from .tree import DfsTree, TreePath

STAGE_BATCH_CAP = 12

Segment = tuple[int, int]  # walk from first to second along a tree path
Gen = Generator[list[EdgeQuery], list, "list[Component]"]


class RerootError(RuntimeError):
    """An internal invariant failed; carries a snapshot of the component."""


@dataclass
class Component:
    cid: int
    path: TreePath | None
    trees: list[int]
    root: int  # r_c, entry vertex inside the component
    attach: int  # vertex of the new tree that becomes the parent of ``root``

    def summary(self) -> dict:
        return {
            "id": self.cid,
            "kind": "C2" if self.path is not None else "C1",
            "path": list(self.path) if self.path is not None else None,
            "trees": list(self.trees),
            "root": self.root,
            "attach": self.attach,
        }


@dataclass
class RerootResult:
    parent: dict[int, int]  # new parent of every vertex of the subtree
    order: list[int]  # vertices in the order they were attached
    stats: RerootStats


class _Part:
    """One disjoint piece of a query's descendant side."""

    __slots__ = ("kind", "a", "b", "rank")

    def __init__(self, kind: int, a: int, b: int, rank: int) -> None:
        self.kind = kind
        self.a = a
        self.b = b
        self.rank = rank  # tie preference: lower wins when landing spots tie

    def query(self, target: TreePath, end: int) -> EdgeQuery:
        return EdgeQuery(self.kind, self.a, self.b, target.top, target.bottom, end)


class Rerooter:
    """Reroots subtrees of one fixed tree ``t``; queries go through ``run_batch``."""

    def __init__(
        self,
        t: DfsTree,
        run_batch: Callable[[list[EdgeQuery]], list[Edge | None]],
        graph: DynamicGraph | None = None,
        instrument: bool = False,
        trace: TextIO | None = None,
    ) -> None:
        self.t = t
        self.run_batch = run_batch
        self.graph = graph
        self.instrument = instrument
        self.trace = trace
        if instrument and graph is None:
            raise ValueError("instrumented mode needs the graph")

    # ------------------------------------------------------------------
    # driver

    def reroot(self, r0: int, r_star: int, attach: int) -> RerootResult:
        t = self.t
        if not t.is_ancestor(r0, r_star):
            raise RerootError(f"new root {r_star} is not inside T({r0})")
        n0 = t.size[r0]
        self._reset(n0)
        start = self._make(None, [r0], r_star, attach)
        self._drive(start, 1)
        if len(self.order) != n0:
            raise RerootError(f"reroot visited {len(self.order)} of {n0} vertices")
        s = self.stats
        if s.batches > batch_bound(n0):
            raise RerootError(f"{s.batches} batches exceed the bound {batch_bound(n0)} for n0={n0}")
        if s.phases > max(self.P, 1) or s.max_stage > self.S:
            raise RerootError(f"phase/stage index out of range: {s.phases}/{s.max_stage} for n0={n0}")
        return RerootResult(self.new_parent, self.order, s)

    def resume(self, c: Component, n0: int, phase: int = 1, placed: dict[int, int] | None = None) -> RerootResult:
        """Finish a reroot from a component built by hand.

        ``placed`` holds the new-tree parents of vertices already visited
        (for example a walk above ``c.attach``); ``n0`` fixes the thresholds.
        """
        self._reset(n0)
        self.new_parent.update(placed or {})
        self._drive(c, phase)
        for v in placed or {}:
            self.new_parent.pop(v, None)
        return RerootResult(self.new_parent, self.order, self.stats)

    def _reset(self, n0: int) -> None:
        self.n0 = n0
        self.P = ceil_log2(n0)
        self.S = ceil_log2(n0) + 1
        self.stats = RerootStats(n0=n0)
        self.memo: dict[EdgeQuery, Edge | None] = {}
        self.new_parent: dict[int, int] = {}
        self.order: list[int] = []
        self._next_cid = 0
        self._last_kind = ""
        self._last_segments: list = []
        self.phase = 1
        self.stage = 1

    def _drive(self, start: Component, phase: int) -> None:
        buckets: dict[tuple[int, int], list[Component]] = {}
        self._place(start, phase, 1, buckets)
        while buckets:
            key = min(buckets)
            comps = buckets.pop(key)
            self.phase, self.stage = key
            self._run_stage(comps, buckets)

    def _make(self, path, trees, root, attach) -> Component:
        self._next_cid += 1
        return Component(self._next_cid, path, list(trees), root, attach)

    # phase i uses threshold n0 / 2^i; the last phase calls every subtree heavy
    def _heavy(self, w: int, i: int | None = None) -> bool:
        i = self.phase if i is None else i
        s = self.t.size[w]
        if i >= self.P:
            return s > 0
        return s << i > self.n0

    def _stage_fits(self, length: int, j: int) -> bool:
        return length << j <= self.n0

    def _place(self, c: Component, i: int, j: int, buckets) -> tuple[int, int] | None:
        """Move ``c`` forward to the phase and stage where it must be traversed.

        Returns None when the component was appended directly.
        """
        t = self.t
        plen = t.path_length(c.path) if c.path is not None else 0
        total = plen + sum(t.size[w] for w in c.trees)
        if total == 1:
            self._append([(c.root, c.root)], c.attach)
            return None
        while True:
            if i < self.P and not any(self._heavy(w, i) for w in c.trees):
                if self.instrument:
                    self._check_phase_exit(c, i)
                i, j = i + 1, 1
                continue
            if plen and j < self.S and self._stage_fits(plen, j):
                j += 1
                continue
            if not plen and j < self.S:
                j = self.S
                continue
            break
        buckets.setdefault((i, j), []).append(c)
        return i, j

    def _check_phase_exit(self, c: Component, i: int) -> None:
        for w in c.trees:
            if self.t.size[w] << i > self.n0:
                raise RerootError(f"subtree {w} too large leaving phase {i}: {c.summary()}")

    # ------------------------------------------------------------------
    # stage scheduler

    def _run_stage(self, comps: list[Component], buckets) -> None:
        i, j = self.phase, self.stage
        key = (i, j)
        active: list[list] = []  # [generator, component, pending queries, batches used]
        for c in comps:
            self._start(c, active, buckets, key)
        rounds = 0
        while active:
            # answer from memo or the tree alone wherever possible
            missing: dict[EdgeQuery, None] = {}
            for slot in active:
                for q in slot[2]:
                    if q not in self.memo and not self._local_answer(q):
                        missing[q] = None
            if missing:
                batch = list(missing)
                res = self.run_batch(batch)
                rounds += 1
                self.stats.batches += 1
                for q, r in zip(batch, res):
                    self.memo[q] = r
                touched = set()
                for slot in active:
                    if any(q in missing for q in slot[2]):
                        slot[3] += 1
                        touched.add(slot[1].cid)
                if self.trace is not None:
                    self._trace({
                        "event": "batch", "phase": i, "stage": j, "size": len(batch),
                        "components": sorted(touched),
                    })
            still: list[list] = []
            for slot in active:
                gen, c, qs, used = slot
                answers = [self.memo[q] for q in qs]
                try:
                    slot[2] = gen.send(answers)
                    still.append(slot)
                except StopIteration as stop:
                    self._finish(c, used, stop.value, buckets, key, still)
            active = still
        self.stats.max_stage_rounds = max(self.stats.max_stage_rounds, rounds)

    def _start(self, c: Component, active: list, buckets, key) -> None:
        gen = self._traverse(c)
        try:
            qs = next(gen)
        except StopIteration as stop:
            self._finish(c, 0, stop.value, buckets, key, active)
            return
        active.append([gen, c, qs, 0])

    def _finish(self, c, used, succ, buckets, key, active) -> None:
        self.stats.max_traversal_batches = max(self.stats.max_traversal_batches, used)
        if used > STAGE_BATCH_CAP:
            raise RerootError(f"traversal used {used} batches (cap {STAGE_BATCH_CAP}): {c.summary()}")
        self.stats.phases = max(self.stats.phases, key[0])
        self.stats.max_stage = max(self.stats.max_stage, key[1])
        if self.instrument:
            self._check_successors(c, succ)
        if self.trace is not None:
            self._trace({
                "event": "traversal", "phase": key[0], "stage": key[1], "component": c.cid,
                "kind": self._last_kind, "segments": self._last_segments,
                "batches": used, "successors": [s.summary() for s in succ],
            })
        for s in succ:
            where = self._place(s, key[0], key[1], buckets)
            if where == key:
                buckets[key].remove(s)
                if not buckets[key]:
                    del buckets[key]
                self._start(s, active, buckets, key)

    def _local_answer(self, q: EdgeQuery) -> bool:
        """Fill the memo when tree ancestry alone shows the answer is empty."""
        t = self.t
        if q.kind == SUBTREE:
            empty = not t.is_ancestor(q.top, q.a)
        else:
            empty = not t.is_ancestor(q.top, q.b) and not t.is_ancestor(q.a, q.bottom)
        if empty:
            self.memo[q] = None
        return empty

    def _trace(self, rec: dict) -> None:
        self.trace.write(json.dumps(rec, sort_keys=True) + "\n")

    # ------------------------------------------------------------------
    # tree helpers

    def _path(self, top: int, bottom: int) -> list[int]:
        return self.t.path_vertices(TreePath(top, bottom))

    def _seg_vertices(self, s: int, e: int) -> list[int]:
        t = self.t
        if t.is_ancestor(s, e):
            return self._path(s, e)
        return self._path(e, s)[::-1]

    def _hang(self, verts: Iterable[int]) -> list[int]:
        """Children of ``verts`` that are not themselves in ``verts``."""
        vs = list(verts)
        on = set(vs)
        out = []
        for v in vs:
            for ch in self.t.children[v]:
                if ch not in on:
                    out.append(ch)
        return out

    def _seg_target(self, seg: Segment) -> tuple[TreePath, int]:
        s, e = seg
        if self.t.is_ancestor(e, s):
            return TreePath(e, s), TOP
        return TreePath(s, e), BOTTOM

    def _in(self, w: int, v: int) -> bool:
        return self.t.is_ancestor(w, v)

    def _child_toward(self, y: int, x: int) -> int:
        c = self.t.child_containing(y, x)
        if c is None:
            raise RerootError(f"{x} is not a proper descendant of {y}")
        return c

    def _find_vh(self, w: int) -> int:
        t = self.t
        v = w
        while True:
            heavy = [c for c in t.children[v] if self._heavy(c)]
            if not heavy:
                return v
            if len(heavy) > 1:
                raise RerootError(f"two heavy children under {v}: {heavy}")
            v = heavy[0]

    def _parts(self, w: int, ch: tuple | None = None) -> list[_Part]:
        """Descendant pieces of T(w); split along the heavy chain when given."""
        if ch is not None and w in ch[0]:
            zset, zlist, hz, vh = ch
            out = []
            k = zlist.index(w)
            for z in zlist[k:-1]:
                out.append(_Part(VERTEX, z, z, 1 if z == w else 2))
                out.extend(_Part(SUBTREE, h, h, 2) for h in hz[z])
            out.append(_Part(SUBTREE, vh, vh, 1 if vh == w else 2))
            return out
        return [_Part(SUBTREE, w, w, 2)]

    def _best(self, hits: Sequence[tuple[EdgeQuery, int, Edge | None]]) -> tuple[Edge, int] | None:
        """Best edge over query answers of one target, with rank tie preference."""
        t = self.t
        lev = t.level
        best = None
        bkey = None
        for q, rank, e in hits:
            if e is None:
                continue
            d = lev[e[1]] - lev[q.top] if q.end == TOP else lev[q.bottom] - lev[e[1]]
            k = (d, rank, t.post[e[0]])
            if bkey is None or k < bkey:
                best, bkey = (e, rank), k
        return best

    # ------------------------------------------------------------------
    # appending to the new tree

    def _append(self, segments: Sequence[Segment], attach: int) -> None:
        prev = attach
        g = self.graph
        for s, e in segments:
            for v in self._seg_vertices(s, e):
                if v in self.new_parent:
                    raise RerootError(f"vertex {v} appended twice")
                if g is not None and self.instrument and not g.has_edge(prev, v):
                    raise RerootError(f"walk step ({prev}, {v}) is not a graph edge")
                self.new_parent[v] = prev
                self.order.append(v)
                prev = v

    def _commit(self, c: Component, kind: str, main: list[Segment], branches=()) -> None:
        self.stats.bump(kind)
        self._last_kind = kind
        self._last_segments = [list(s) for s in main] + [
            [list(s) for s in segs] + [at] for segs, at in branches
        ]
        self._append(main, c.attach)
        for segs, at in branches:
            self._append(segs, at)

    # ------------------------------------------------------------------
    # process-comp: regroup the residue and pick every new root

    def _process(
        self,
        paths: Sequence[TreePath | None],
        trees: Sequence[int],
        order: Sequence[Segment],
        prefer: int | None = None,
        chain: tuple | None = None,
        strict: bool = True,
    ) -> Gen:
        """Group residual subtrees with residual paths and root each group.

        ``order`` lists the appended segments deepest-in-new-tree first; a group
        hangs from its first segment with an edge. ``prefer`` names a subtree
        whose edges win ties on the landing vertex. When the residue would
        hold two paths in one component, raise, or return None if not ``strict``.
        """
        t = self.t
        paths = [p for p in paths if p is not None]
        member_of: dict[int, int] = {}
        for pi, p in enumerate(paths):
            qs, owners = [], []
            for w in trees:
                for part in self._parts(w, chain):
                    qs.append(part.query(p, TOP))
                    owners.append(w)
            # residual paths must not touch each other directly
            links = [EdgeQuery.path(o.top, o.bottom, p.top, p.bottom, TOP) for o in paths[pi + 1:]] if pi == 0 else []
            res = yield qs + links
            if any(r is not None for r in res[len(qs):]):
                if strict:
                    raise RerootError(f"residual paths {[tuple(x) for x in paths]} share an edge")
                return None
            hit = {w for w, r in zip(owners, res) if r is not None}
            for w in trees:
                if w in hit:
                    if w in member_of:
                        if strict:
                            raise RerootError(
                                f"subtree {w} touches residual paths {tuple(paths[member_of[w]])} and {tuple(p)}"
                            )
                        return None
                    member_of[w] = pi
        groups: list[tuple[TreePath | None, list[int]]] = []
        for pi, p in enumerate(paths):
            groups.append((p, [w for w in trees if member_of.get(w) == pi]))
        for w in trees:
            if w not in member_of:
                groups.append((None, [w]))

        found: dict[int, tuple[Edge, int]] = {}
        for seg in order:
            open_groups = [gi for gi in range(len(groups)) if gi not in found]
            if not open_groups:
                break
            target, end = self._seg_target(seg)
            qs, ranks, owner = [], [], []
            for gi in open_groups:
                p, members = groups[gi]
                items = []
                if p is not None:
                    items.append(_Part(PATH, p.top, p.bottom, 0))
                for w in members:
                    for part in self._parts(w, chain):
                        if prefer is not None and w == prefer:
                            part = _Part(part.kind, part.a, part.b, part.rank - 2)
                        items.append(part)
                for part in items:
                    qs.append(part.query(target, end))
                    ranks.append(part.rank)
                    owner.append(gi)
            res = yield qs
            per: dict[int, list] = {}
            for q, rk, gi, r in zip(qs, ranks, owner, res):
                per.setdefault(gi, []).append((q, rk, r))
            for gi, hits in per.items():
                b = self._best(hits)
                if b is not None:
                    found[gi] = b
        out = []
        for gi, (p, members) in enumerate(groups):
            if gi not in found:
                raise RerootError(
                    f"residual piece path={p} trees={members} has no edge to the appended walk"
                )
            (x, y), _ = found[gi]
            out.append(self._make(p, members, x, y))
        return out

    # ------------------------------------------------------------------
    # dispatch

    def _traverse(self, c: Component) -> Gen:
        t = self.t
        if c.path is None:
            return (yield from self._disint(c))
        if t.on_path(c.root, c.path):
            return (yield from self._halve(c))
        tau = next(w for w in c.trees if self._in(w, c.root))
        if not self._heavy(tau):
            return (yield from self._discon(c, tau))
        if c.root == tau:
            return (yield from self._disint(c))
        vh = self._find_vh(tau)
        if self._in(vh, c.root):
            return (yield from self._discon(c, tau))
        return (yield from self._heavy_dfs(c, tau, vh))

    # ------------------------------------------------------------------
    # the simpler traversals

    def _disint(self, c: Component) -> Gen:
        t = self.t
        rc = c.root
        tau = next(w for w in c.trees if self._in(w, rc))
        if not self._heavy(tau):
            raise RerootError(f"disintegrating traversal without a heavy subtree: {c.summary()}")
        vh = self._find_vh(tau)
        vl = t.lca(rc, vh)
        segs: list[Segment] = [(rc, vl)]
        if vh != vl:
            segs.append((self._child_toward(vl, vh), vh))
        upper = self._path(tau, rc)
        lower = self._path(vl, vh)
        residue = self._hang(upper + lower[1:])
        paths: list[TreePath | None] = []
        if c.path is not None:
            paths.append(c.path)
        elif vl != tau:
            paths.append(TreePath(tau, t.parent[vl]))
        others = [w for w in c.trees if w != tau]
        succ = yield from self._process(paths, residue + others, segs[::-1])
        self._commit(c, "disint", segs)
        return succ

    def _halve(self, c: Component) -> Gen:
        t = self.t
        rc = c.root
        top, bot = c.path
        far = t.farther_end(c.path, rc)
        if far == top:
            rest = TreePath(self._child_toward(rc, bot), bot) if rc != bot else None
        else:
            rest = TreePath(top, t.parent[rc]) if rc != top else None
        segs = [(rc, far)]
        succ = yield from self._process([rest], c.trees, segs)
        self._commit(c, "halve", segs)
        return succ

    def _discon(self, c: Component, tau: int) -> Gen:
        t = self.t
        rc = c.root
        top, bot = c.path
        k = t.path_length(c.path)
        half = (k - 1) // 2
        (hi,) = yield [EdgeQuery.subtree(tau, top, bot, TOP)]
        if hi is None:
            raise RerootError(f"subtree {tau} has no edge to its path: {c.summary()}")
        x, y = hi
        if t.level[y] - t.level[top] <= half:
            pseg = (y, bot)
            rest = TreePath(top, t.parent[y]) if y != top else None
        else:
            (lo,) = yield [EdgeQuery.subtree(tau, top, bot, BOTTOM)]
            x, y = lo
            pseg = (y, top)
            rest = TreePath(self._child_toward(y, bot), bot) if y != bot else None
        l = t.lca(rc, x)
        segs: list[Segment] = [(rc, l)]
        if x != l:
            segs.append((self._child_toward(l, x), x))
        segs.append(pseg)
        upper = self._path(tau, rc)
        lower = self._path(l, x)
        residue = self._hang(upper + lower[1:])
        p_up = TreePath(tau, t.parent[l]) if l != tau else None
        others = [w for w in c.trees if w != tau]
        succ = yield from self._process([p_up, rest], residue + others, segs[::-1])
        self._commit(c, "discon", segs)
        return succ

    # ------------------------------------------------------------------
    # heavy subtree traversal

    def _heavy_dfs(self, c: Component, tau: int, vh: int) -> Gen:
        t = self.t
        lev = t.level
        rc = c.root
        pc = c.path
        vl = t.lca(rc, vh)
        vL = self._child_toward(vl, vh)
        A = TreePath(tau, rc)
        a_verts = self._path(tau, rc)
        ha = self._hang(a_verts)
        ha_o = [w for w in ha if w != vL]
        zlist = self._path(vL, vh)
        zset = set(zlist)
        hz = {z: [ch for ch in t.children[z] if ch not in zset] for z in zlist[:-1]}
        chain = (zset, zlist, hz, vh)
        others = [w for w in c.trees if w != tau]
        vL_parts = self._parts(vL, chain)

        # round 1: which hanging subtrees reach p_c; p_c's own edges onto A
        q_pc_a = EdgeQuery.path(pc.top, pc.bottom, A.top, A.bottom, TOP)
        qs = [EdgeQuery.subtree(w, pc.top, pc.bottom, TOP) for w in ha_o]
        qs += [p.query(pc, TOP) for p in vL_parts]
        qs.append(q_pc_a)
        res = yield qs
        elig = {w: r is not None for w, r in zip(ha_o, res)}
        part_elig = [r is not None for r in res[len(ha_o):len(ha_o) + len(vL_parts)]]
        elig_vL = any(part_elig)
        pc_on_a = res[-1]
        elig_hz = {p.a for p, e in zip(vL_parts, part_elig) if e and p.kind == SUBTREE and p.a != vh}

        # round 2: highest edge onto A from every hanging piece
        qa = [EdgeQuery.subtree(w, A.top, A.bottom, TOP) for w in ha_o]
        qa_l = [p.query(A, TOP) for p in vL_parts]
        res = yield qa + qa_l
        on_a = dict(zip(ha_o, res[:len(ha_o)]))
        part_on_a = res[len(ha_o):]

        hits = [(q_pc_a, 0, pc_on_a)]
        hits += [(q, 2, on_a[w]) for q, w in zip(qa, ha_o) if elig[w]]
        if elig_vL:
            hits += [(q, p.rank, r) for q, p, r in zip(qa_l, vL_parts, part_on_a)]
        b1 = self._best(hits)
        if b1 is None:
            raise RerootError(f"heavy traversal found no edge onto path(r_c, r'): {c.summary()}")
        x1 = b1[0][0]
        if not self._bad_entry(x1, vL, vh):
            return (yield from self._l_walk(c, tau, ha + others, chain, "heavy_l"))

        # scenario 2: pick (x_d, y_d), then (x_p, y_p) with the deepest lca on the chain
        dh = [(q, 2, on_a[w]) for q, w in zip(qa, ha_o) if elig[w]]
        dh += [(q, 2, r) for q, p, r in zip(qa_l, vL_parts, part_on_a) if p.a in elig_hz and p.kind == SUBTREE]
        bd = self._best(dh)
        xd, yd = bd[0] if bd is not None else (None, None)
        tgt = TreePath(tau, yd) if yd is not None and lev[yd] < lev[vl] else A
        qp = [p.query(tgt, TOP) for p in vL_parts]
        res = yield qp
        best_z = None
        pool = []
        for q, p, r in zip(qp, vL_parts, res):
            if r is None:
                continue
            z = p.a if p.kind == VERTEX or p.a == vh else t.parent[p.a]
            if best_z is None or lev[z] > lev[best_z]:
                best_z, pool = z, [(q, 2, r)]
            elif z == best_z:
                pool.append((q, 2, r))
        if best_z is None:
            raise RerootError(f"no p-edge from T({vL}): {c.summary()}")
        (xp, yp), _ = self._best(pool)
        zp = best_z
        segs = [(rc, vl), (vL, xp)]
        if yp != vl:
            segs.append((yp, t.parent[vl]))
            pres = TreePath(tau, t.parent[yp]) if yp != tau else None
        else:
            pres = TreePath(tau, t.parent[vl]) if vl != tau else None
        down = self._path(vL, xp)
        trees2 = ha_o + self._hang(down) + others
        vP = self._child_toward(zp, vh) if zp != vh else None
        succ = yield from self._process([pc, pres], trees2, segs[::-1], chain=chain, strict=False)
        if succ is None:
            return (yield from self._l_walk(c, tau, ha + others, chain, "heavy_fallback"))
        pcomp = next(s for s in succ if s.path == pc)
        x2, y2 = pcomp.root, pcomp.attach
        if vP is None or not self._bad_entry(x2, vP, vh):
            self._commit(c, "heavy_p", segs)
            return succ

        # scenario 3: r traversal through (x_r, y_r)
        if not (lev[y2] < lev[vl] and self._in(y2, rc)):
            raise RerootError(
                f"r-edge ({x2}, {y2}) does not land above v_l={vl}: {c.summary()}"
            )
        tau_p = None
        if not self._in(vh, xp) and xp not in zset:
            tau_p = next(h for h in hz[zp] if self._in(h, xp))
        xr, yr = x2, y2
        alt = None
        if tau_p is not None:
            (alt,) = yield [EdgeQuery.subtree(tau_p, A.top, A.bottom, BOTTOM)]
            if alt is not None and lev[y2] < lev[alt[1]] < lev[vl]:
                xr, yr = alt
        zr = t.lca(xr, vh)
        vR = self._child_toward(zr, vh) if zr != vh else None
        segs3 = [(rc, vl), (vL, xr), (yr, tau)]
        pres3 = TreePath(self._child_toward(yr, vl), t.parent[vl]) if yr != t.parent[vl] else None
        trees3 = ha_o + self._hang(self._path(vL, xr)) + others
        succ = yield from self._process([pc, pres3], trees3, segs3[::-1], chain=chain, strict=False)
        if succ is None:
            return (yield from self._l_walk(c, tau, ha + others, chain, "heavy_fallback"))
        pcomp = next(s for s in succ if s.path == pc)
        x3, y3 = pcomp.root, pcomp.attach
        if vR is None or not self._bad_entry(x3, vR, vh):
            self._commit(c, "heavy_r", segs3)
            return succ

        ctx = _HeavyContext(
            rc=rc, tau=tau, vh=vh, vl=vl, vL=vL, vP=vP, vR=vR, x1=b1[0], xd=bd[0] if bd else None,
            xp=(xp, yp), x2=(x2, y2), x2alt=alt, xr=(xr, yr), x3=(x3, y3), tau_p=tau_p,
        )
        return (yield from self._heavy_special(c, ctx, ha_o, others, chain))

    def _l_walk(self, c: Component, tau: int, trees: list[int], chain, kind: str) -> Gen:
        """Walk from r_c straight up to root(tau); never leaves a second path."""
        segs = [(c.root, tau)]
        succ = yield from self._process([c.path], trees, segs, chain=chain)
        self._commit(c, kind, segs)
        return succ

    def _bad_entry(self, x: int, v_sub: int, vh: int) -> bool:
        """True when entering at ``x`` breaks the third applicability condition."""
        return self._in(v_sub, x) and not self._in(vh, x) and x != v_sub

    # ------------------------------------------------------------------
    # special case of the heavy traversal

    def _heavy_special(self, c: Component, ctx: "_HeavyContext", ha_o, others, chain) -> Gen:
        t = self.t
        lev = t.level
        rc, tau, vh, vl, vL = ctx.rc, ctx.tau, ctx.vh, ctx.vl, ctx.vL
        pc = c.path
        xp, yp = ctx.xp
        x2, y2 = ctx.x2
        xr, yr = ctx.xr
        x3, y3 = ctx.x3
        _, _, hz, _ = chain
        tau_d = None
        if ctx.xd is not None:
            xd, yd = ctx.xd
            zd = t.lca(xd, vh)
            tau_d = next((h for h in hz.get(zd, []) if self._in(h, xd)), None)
        ok = (
            tau_d is not None
            and ctx.vR is not None and self._in(ctx.vR, x3)
            and self._in(tau_d, xp)
            and ctx.x2alt is not None and (xr, yr) == ctx.x2alt
        )
        if not ok:
            raise RerootError(f"no heavy scenario applies and the special case does not hold: {ctx}")
        xd, yd = ctx.xd
        if not (yd == yp and lev[y3] > lev[yd] and lev[yr] > lev[y2]):
            raise RerootError(f"special-case properties fail on entry: {ctx}")

        # modified r' traversal through (x2, y2)
        main = [(rc, vl), (vL, x2), (y2, tau)]
        p1 = TreePath(self._child_toward(y2, vl), t.parent[vl])
        hang_main = ha_o + self._hang(self._path(vL, x2))
        if tau_d not in hang_main:
            raise RerootError(f"tau_d={tau_d} does not hang from the modified walk: {ctx}")
        qs = []
        for w in hang_main:
            qs += [p.query(p1, TOP) for p in self._parts(w, chain)]
        res = yield qs
        touch = set()
        k = 0
        for w in hang_main:
            n = len(self._parts(w, chain))
            if any(r is not None for r in res[k:k + n]):
                touch.add(w)
            k += n
        grp = [w for w in hang_main if w in touch]
        # lowest edge on the modified walk from p1 and the subtrees touching it
        entry = None
        for seg in main[::-1]:
            target, end = self._seg_target(seg)
            items = [(_Part(PATH, p1.top, p1.bottom, 1), None)]
            for w in grp:
                items += [(_Part(p.kind, p.a, p.b, 0 if w == tau_d else 1), w) for p in self._parts(w, chain)]
            qs = [p.query(target, end) for p, _ in items]
            res = yield qs
            b = self._best([(q, p.rank, r) for q, (p, _), r in zip(qs, items, res)])
            if b is not None:
                entry = b[0]
                break
        if entry is None:
            raise RerootError(f"p1 group has no edge onto the modified walk: {ctx}")
        ex, ey = entry

        if self._in(tau_d, ex):
            # root traversal of tau_d
            branch = [(ex, tau_d)]
            up_td = self._path(tau_d, ex)
            trees = [w for w in hang_main if w != tau_d] + self._hang(up_td) + others
            order = branch + main[::-1]
            succ = yield from self._process([pc, p1], trees, order, chain=chain)
            self._commit(c, "special_root", main, [(branch, ey)])
            return succ

        # cover traversal of p1
        tprime = None
        if not t.on_path(ex, p1):
            tprime = next(w for w in grp if self._in(w, ex))
            y_t = ex
            (hi,) = yield [EdgeQuery.subtree(tprime, p1.top, p1.bottom, TOP)]
            x_t, xq = hi
        else:
            xq = ex
        if lev[xq] >= lev[yr]:
            if tprime is not None:
                (lo,) = yield [EdgeQuery.subtree(tprime, p1.top, p1.bottom, BOTTOM)]
                x_t, xq = lo
            pseg = (xq, p1.top)
            rest = TreePath(p1.top if False else self._child_toward(xq, vl), t.parent[vl]) if xq != t.parent[vl] else None
            walk = main
            kind = "special_up"
        else:
            star = None
            if xq != p1.top:
                between = TreePath(p1.top, t.parent[xq])
                (star,) = yield [EdgeQuery.subtree(tau_d, between.top, between.bottom, BOTTOM)]
            if star is None:
                star = (x2, y2)
            xs, ys = star
            walk = [(rc, vl), (vL, xs), (ys, tau)]
            pseg = (xq, t.parent[vl])
            rest = TreePath(self._child_toward(ys, xq), t.parent[xq]) if lev[xq] - lev[ys] >= 2 else None
            kind = "special_down"
        walk_verts = set()
        for s in walk:
            walk_verts.update(self._seg_vertices(*s))
        if ey not in walk_verts:
            raise RerootError(f"cover entry {ey} is not on the walk: {ctx}")
        hang_walk = ha_o + self._hang(self._path(vL, walk[1][1]))
        branch: list[Segment] = []
        tp_rest = None
        extra: list[int] = []
        if tprime is not None:
            if tprime not in hang_walk:
                raise RerootError(f"subtree {tprime} does not hang from the walk: {ctx}")
            lp = t.lca(x_t, y_t)
            branch.append((y_t, lp))
            if x_t != lp:
                branch.append((self._child_toward(lp, x_t), x_t))
            tp_rest = TreePath(tprime, t.parent[lp]) if lp != tprime else None
            extra = self._hang(self._path(tprime, y_t) + self._path(lp, x_t)[1:])
            hang_walk = [w for w in hang_walk if w != tprime]
        branch.append(pseg)
        trees = hang_walk + extra + others
        order = branch[::-1] + walk[::-1]
        succ = yield from self._process([pc, rest, tp_rest], trees, order, chain=chain)
        self._commit(c, kind, walk, [(branch, ey)])
        return succ

    # ------------------------------------------------------------------
    # instrumented checks (brute force over the graph)

    def _vertices_of(self, c: Component) -> set[int]:
        t = self.t
        vs: set[int] = set()
        if c.path is not None:
            vs.update(t.path_vertices(c.path))
        for w in c.trees:
            vs.update(t.subtree_vertices(w))
        return vs

    def _check_successors(self, parent: Component, succ: list[Component]) -> None:
        t, g = self.t, self.graph
        sets = []
        owner: dict[int, int] = {}
        for k, s in enumerate(succ):
            if s.path is None and len(s.trees) != 1:
                raise RerootError(f"C1 component without exactly one subtree: {s.summary()}")
            if s.path is not None and not t.is_ancestor(s.path.top, s.path.bottom):
                raise RerootError(f"component path is not ancestor-descendant: {s.summary()}")
            vs = self._vertices_of(s)
            if s.root not in vs:
                raise RerootError(f"component root outside the component: {s.summary()}")
            for v in vs:
                if v in owner or v in self.new_parent:
                    raise RerootError(f"vertex {v} claimed twice: {s.summary()}")
                owner[v] = k
            sets.append(vs)
        for k, s in enumerate(succ):
            if s.path is not None:
                pv = set(t.path_vertices(s.path))
                for w in s.trees:
                    if not any(u in pv for v in t.subtree_vertices(w) for u in g.adj[v]):
                        raise RerootError(f"subtree {w} has no edge to its path: {s.summary()}")
            tv = {w: set(t.subtree_vertices(w)) for w in s.trees}
            for w, vs in tv.items():
                for v in vs:
                    for u in g.adj[v]:
                        o = owner.get(u)
                        if o is not None and o != k:
                            raise RerootError(f"edge ({v}, {u}) joins two successor components")
                        for w2 in s.trees:
                            if w2 != w and u in tv[w2]:
                                raise RerootError(f"edge ({v}, {u}) joins subtrees {w} and {w2}")
            if s.path is not None:
                for v in t.path_vertices(s.path):
                    for u in g.adj[v]:
                        o = owner.get(u)
                        if o is not None and o != k:
                            raise RerootError(f"edge ({v}, {u}) joins two successor components")
        # every root must sit on the lowest edge onto the walk just appended
        depth: dict[int, int] = {}

        def tdepth(v: int) -> int:
            chain = []
            while v in self.new_parent and v not in depth:
                chain.append(v)
                v = self.new_parent[v]
            base = depth.get(v, 0)
            for u in reversed(chain):
                base += 1
                depth[u] = base
            return base

        for k, s in enumerate(succ):
            best = -1
            for v in sets[k]:
                for u in g.adj[v]:
                    if u in self.new_parent:
                        best = max(best, tdepth(u))
            if s.attach not in self.new_parent or tdepth(s.attach) != best:
                raise RerootError(f"root of {s.summary()} is not on its lowest edge")
            if not g.has_edge(s.root, s.attach):
                raise RerootError(f"attach edge ({s.attach}, {s.root}) is not a graph edge")


@dataclass
class _HeavyContext:
    rc: int
    tau: int
    vh: int
    vl: int
    vL: int
    vP: int | None
    vR: int | None
    x1: Edge
    xd: Edge | None
    xp: Edge
    x2: Edge
    x2alt: Edge | None
    xr: Edge
    x3: Edge
    tau_p: int | None
