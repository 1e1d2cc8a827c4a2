"""Check that every event of a run is drawn in the extracted diagram.

Matching is by origin: each trace event names the syntax node that caused
it, and the extractor tags edges and dispatches with the same ids.  The
check is one-directional (trace within diagram) because static extraction
also draws branches the run did not take.  Straight-line programs get an
extra exactness check on call dispatches.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..core import Diagram, EdgeKind, NodeRef, TimelinePos, alias_map
from .trace import ROOT, Trace, TraceEvent

_WRITE_KINDS = (EdgeKind.DATA_UPDATE, EdgeKind.CREATE, EdgeKind.DATA_FLOW)
_READ_KINDS = (EdgeKind.DATA_READ, EdgeKind.DATA_FLOW)


class FingerprintMismatch(ValueError):
    """The diagram and the trace come from different programs."""


@dataclass(frozen=True)
class Discrepancy:
    kind: str
    message: str
    seq: Optional[int] = None

    def __str__(self) -> str:
        where = f" [event {self.seq}]" if self.seq is not None else ""
        return f"{self.kind}: {self.message}{where}"


def _sid(fingerprint: str) -> int:
    return int(fingerprint.rsplit("#", 1)[1])


class _Index:
    def __init__(self, d: Diagram) -> None:
        self.d = d
        self.by_key: dict[str, int] = {}
        self.anchors: dict[int, list[int]] = {}
        self.label_by_sym: dict[str, int] = {}
        module = None
        for n in d.nodes.values():
            key = n.attrs.get("key")
            if key is None:
                continue
            self.by_key[key] = n.id
            if "origin" in n.attrs:
                self.anchors.setdefault(n.attrs["origin"], []).append(n.id)
            if key == "module":
                module = n
            elif key.startswith("stmt:") and "sym" in n.attrs:
                self.label_by_sym[n.attrs["sym"]] = n.id
        if module is None:
            raise ValueError("diagram carries no extraction annotations")
        self.module = module
        self.granularity = module.attrs.get("granularity", "operator")
        self.canon = alias_map(d)
        self.edges_by_origin: dict[int, list] = {}
        for e in d.edges.values():
            for o in e.origins:
                self.edges_by_origin.setdefault(o, []).append(e)
        self.dispatches_by_origin: dict[int, list] = {}
        for t in d.timelines.values():
            for x in t.dispatches:
                if x.origin is not None:
                    self.dispatches_by_origin.setdefault(x.origin, []).append((t, x))
        self.parts = self._parts()
        self.reachable = self._reachable()

    def _parts(self) -> dict[int, set[int]]:
        children: dict[int, set[int]] = {}
        for e in self.d.edges_of(EdgeKind.HAS):
            if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
                children.setdefault(e.src.node, set()).add(e.dst.node)
        for c, p in self.d.euler.items():
            children.setdefault(p, set()).add(c)
        out: dict[int, set[int]] = {}
        for n in self.d.nodes.values():
            if not n.is_holder:
                continue
            seen, todo = {n.id}, [n.id]
            while todo:
                for m in children.get(todo.pop(), ()):
                    if m not in seen and self.d.nodes[m].is_holder:
                        seen.add(m)
                        todo.append(m)
            out[n.id] = seen
        return out

    def _reachable(self) -> set[int]:
        owned: dict[int, list] = {}
        for t in self.d.timelines.values():
            if t.owner is not None:
                owned.setdefault(t.owner, []).append(t)
        succ: dict[int, list[int]] = {}
        for e in self.d.edges_of(EdgeKind.CONTROL_PAR, EdgeKind.EXCEPTION):
            if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
                succ.setdefault(e.src.node, []).append(e.dst.node)
        entry = self.by_key.get(f"fn:{self.module.attrs.get('entry')}")
        start = [n for n in (entry, self.module.id) if n is not None]
        seen = set(start)
        todo = list(start)
        while todo:
            n = todo.pop()
            nxt = [self.canon[n]] + succ.get(n, [])
            for t in owned.get(n, []):
                nxt += [x.target for x in t.dispatches]
            for m in nxt:
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen

    def timeline_live(self, t) -> bool:
        return t.owner is None or t.owner in self.reachable

    def holder(self, arg: str) -> Optional[int]:
        if arg.startswith("ret:"):
            return self.by_key.get(f"ret:{_sid(arg[4:])}")
        sid = _sid(arg)
        return self.by_key.get(f"sym:{sid}", self.by_key.get(f"fnconst:{sid}"))

    def fn_node(self, fingerprint: str) -> Optional[int]:
        return self.by_key.get(f"fn:{_sid(fingerprint)}")


def conform(d: Diagram, trace: Trace, *, strict_ranks: bool = False) -> list[Discrepancy]:
    """Discrepancies between a run and the diagram extracted from the same program."""
    ix = _Index(d)
    symtab = ix.module.content.removeprefix("symtab:")
    if symtab != trace.fingerprint:
        raise FingerprintMismatch(
            f"diagram symtab {symtab} does not match trace symtab {trace.fingerprint}")
    structural = ix.granularity != "function"
    out: list[Discrepancy] = []
    reported_reach: set[int] = set()

    def flag(kind: str, msg: str, ev: Optional[TraceEvent] = None) -> None:
        out.append(Discrepancy(kind, msg, ev.seq if ev else None))

    def edge_into(ev, kinds, arg) -> bool:
        h = ix.holder(arg)
        targets = ix.parts.get(h, set()) if h is not None else set()
        return any(e.kind in kinds and isinstance(e.dst, NodeRef) and e.dst.node in targets
                   for e in ix.edges_by_origin.get(ev.origin, ()))

    def edge_out_of(ev, kinds, arg) -> bool:
        h = ix.holder(arg)
        sources = ix.parts.get(h, set()) if h is not None else set()
        return any(e.kind in kinds and isinstance(e.src, NodeRef) and e.src.node in sources
                   for e in ix.edges_by_origin.get(ev.origin, ()))

    def origin_edges(ev, kind):
        return [e for e in ix.edges_by_origin.get(ev.origin, ()) if e.kind is kind]

    def call_dispatch(ev):
        callee = ix.fn_node(ev.args[1])
        caller_sid = None if ev.args[0] == ROOT else _sid(ev.args[0])
        for t, x in ix.dispatches_by_origin.get(ev.origin, ()):
            if not ix.timeline_live(t) or callee is None or ix.canon[x.target] != callee:
                continue
            if t.attrs.get("func") == caller_sid:
                return t, x
        return None

    frames: dict[int, list[dict]] = {}
    calls_at: Counter = Counter()
    runs: Counter = Counter()

    for ev in trace.events:
        stack = frames.setdefault(ev.thread, [{}])
        n, a = ev.name, ev.args
        if n == "Call":
            runs[_sid(a[1])] += 1
            if a[0] != ROOT:
                calls_at[ev.origin] += 1
                hit = call_dispatch(ev)
                if hit is None:
                    flag("call", f"no dispatch from {a[0]} to {a[1]} for call site @{ev.origin}", ev)
                else:
                    t, x = hit
                    last = stack[-1].get(t.id)
                    if last is not None and x.rank <= last:
                        flag("order", f"call @{ev.origin} at rank {x.rank} ran after rank {last} "
                             f"on {t.ident}", ev)
                    stack[-1][t.id] = x.rank
            stack.append({})
        elif n == "Return":
            if len(stack) > 1:
                stack.pop()
        elif n == "Write":
            if not edge_into(ev, _WRITE_KINDS, a[0]):
                flag("write", f"no update edge into {a[0]} for @{ev.origin}", ev)
        elif n == "Read":
            if not edge_out_of(ev, _READ_KINDS, a[0]):
                flag("read", f"no read edge out of {a[0]} for @{ev.origin}", ev)
        elif n == "Alloc":
            if not edge_into(ev, (EdgeKind.CREATE,), a[0]):
                flag("alloc", f"no create edge into {a[0]} for @{ev.origin}", ev)
        elif n == "Free":
            if not edge_into(ev, (EdgeKind.DESTROY,), a[0]):
                flag("free", f"no destroy edge into {a[0]} for @{ev.origin}", ev)
        elif n == "Spawn":
            par = origin_edges(ev, EdgeKind.CONTROL_PAR)
            roots = {ix.canon[x.target] for t in d.timelines.values() if t.owner is None
                     for x in t.dispatches}
            if not any(isinstance(e.dst, NodeRef) and ix.canon[e.dst.node] in roots for e in par):
                flag("spawn", f"no parallel control edge and root timeline for @{ev.origin}", ev)
        elif n == "Catch":
            stack[-1].clear()
            if structural and not origin_edges(ev, EdgeKind.EXCEPTION):
                flag("catch", f"no exception edge for try @{ev.origin}", ev)
        elif n == "Jump":
            stack[-1].clear()
            if structural:
                _check_jump(ix, ev, origin_edges(ev, EdgeKind.CONTROL_RETURN), strict_ranks, flag)
        elif n == "EnterBlock":
            if a and a[0] == "loop":
                stack[-1].clear()
            if structural and a and a[0] != "catch":
                if not any(ix.timeline_live(t) for t, _ in ix.dispatches_by_origin.get(ev.origin, ())):
                    flag("block", f"no dispatch for {a[0]} block @{ev.origin}", ev)

        anchors = ix.anchors.get(ev.origin)
        if anchors and ev.origin not in reported_reach:
            if not any(x in ix.reachable for x in anchors):
                reported_reach.add(ev.origin)
                names = ", ".join(d.nodes[x].ident for x in anchors)
                flag("reach", f"{names} executed but not reachable from the entry", ev)

    if ix.module.attrs.get("straight_line"):
        _check_exact(ix, calls_at, runs, flag)
    return out


def _check_jump(ix: _Index, ev: TraceEvent, edges: list, strict: bool, flag) -> None:
    if not edges:
        flag("jump", f"no returning edge for jump @{ev.origin}", ev)
        return
    label = ix.label_by_sym.get(ev.args[0]) if ev.args and "#" in ev.args[0] else None
    if label is None:
        return
    for e in edges:
        if not isinstance(e.dst, TimelinePos):
            continue
        t = ix.d.timelines[e.dst.timeline]
        ranks = [x.rank for x in t.dispatches if x.target == label]
        if ranks and (not strict or e.dst.rank in ranks):
            return
    flag("jump", f"returning edge for @{ev.origin} does not lead to {ev.args[0]}", ev)


def _check_exact(ix: _Index, calls_at: Counter, runs: Counter, flag) -> None:
    """In a straight-line program every call site runs once per run of its function."""
    for t in ix.d.timelines.values():
        fsid = t.attrs.get("func")
        if fsid is None or not runs[fsid]:
            continue
        for x in t.dispatches:
            key = ix.d.nodes[ix.canon[x.target]].attrs.get("key", "")
            if not key.startswith(("fn:", "unres:")):
                continue
            if calls_at[x.origin] != runs[fsid]:
                flag("exact", f"call site @{x.origin} ran {calls_at[x.origin]} time(s), "
                     f"its function ran {runs[fsid]}")
