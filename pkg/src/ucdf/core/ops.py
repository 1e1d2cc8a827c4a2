"""Graph queries and rewrites over a finished diagram."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

from .model import (
    DATA_KINDS,
    Diagram,
    DiagramError,
    Edge,
    EdgeKind,
    EdgeRef,
    NodeRef,
    TimelinePos,
)


def alias_canonical(d: Diagram, nid: int) -> int:
    """Smallest node id in the Alias-connected component of ``nid``."""
    if nid not in d.nodes:
        raise DiagramError(f"unknown node {nid}")
    adj: dict[int, set] = {}
    for e in d.edges_of(EdgeKind.ALIAS):
        if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
            adj.setdefault(e.src.node, set()).add(e.dst.node)
            adj.setdefault(e.dst.node, set()).add(e.src.node)
    seen = {nid}
    todo = [nid]
    while todo:
        for m in adj.get(todo.pop(), ()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return min(seen)


def alias_map(d: Diagram) -> dict[int, int]:
    """alias_canonical for every node at once."""
    parent = {n: n for n in d.nodes}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in d.edges_of(EdgeKind.ALIAS):
        if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
            a, b = find(e.src.node), find(e.dst.node)
            if a != b:
                parent[max(a, b)] = min(a, b)
    return {n: find(n) for n in d.nodes}


def data_sources(d: Diagram, holder: int) -> set[int]:
    """Every node whose information can reach ``holder``.

    Walks DataUpdate, DataFlow and DataRead edges backwards; the read edges
    are needed so that a holder written by a process inherits whatever that
    process consumed.
    """
    n = d.nodes.get(holder)
    if n is None or not n.is_holder:
        raise DiagramError(f"{holder} is not a holder")
    back: dict[int, set] = {}
    for e in d.edges_of(*DATA_KINDS):
        if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
            back.setdefault(e.dst.node, set()).add(e.src.node)
    seen: set[int] = set()
    todo = deque([holder])
    while todo:
        for m in back.get(todo.popleft(), ()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    seen.discard(holder)
    return seen


def control_subtree(d: Diagram, root: int, keep: Iterable[int] = ()) -> set[int]:
    """Nodes reached from ``root`` through its timelines, recursively.

    Exception handlers reached from an interior try block belong to the
    subtree too.  Nodes in ``keep`` are neither absorbed nor traversed.
    """
    keep = set(keep)
    owned: dict[int, list[int]] = {}
    for t in d.timelines.values():
        if t.owner is not None:
            owned.setdefault(t.owner, []).extend(x.target for x in t.dispatches)
    handlers: dict[int, list[int]] = {}
    for e in d.edges_of(EdgeKind.EXCEPTION):
        if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
            handlers.setdefault(e.src.node, []).append(e.dst.node)
    inside: set[int] = set()
    todo = [root]
    while todo:
        x = todo.pop()
        for m in owned.get(x, []) + handlers.get(x, []):
            if m != root and m not in inside and m not in keep:
                inside.add(m)
                todo.append(m)
    return inside


def contract(d: Diagram, process: int, keep: Iterable[int] = ()) -> Diagram:
    """Collapse a process and its control subtree into the single process node.

    Data edges touching the collapsed group become abstract DataFlow edges
    (direction kept); Create/Destroy keep their kind; other edges crossing the
    boundary are re-attached to the process.  Edges internal to the group,
    returns into removed timelines and aliases of removed nodes are dropped.
    Duplicates are merged.  ``d`` is not modified.
    """
    if not d.is_process_like(process):
        raise DiagramError(f"{process} is not process-like")
    interior = control_subtree(d, process, keep)
    group = interior | {process}
    out = Diagram()
    out._next_node = d._next_node
    out._next_timeline = d._next_timeline

    for n in sorted(d.nodes.values(), key=lambda n: n.id):
        if n.id in interior:
            continue
        out.nodes[n.id] = _clone_node(n)
        out._idents[n.ident] = ("node", n.id)

    dropped_timelines = {t.id for t in d.timelines.values() if t.owner in group}
    for t in sorted(d.timelines.values(), key=lambda t: t.id):
        if t.id in dropped_timelines:
            continue
        tl = _clone_timeline(t)
        out.timelines[t.id] = tl
        out._idents[t.ident] = ("timeline", t.id)

    for child, parent in sorted(d.euler.items()):
        if child in interior:
            continue
        out.euler[child] = process if parent in interior else parent

    def remap(ep):
        if isinstance(ep, NodeRef) and ep.node in interior:
            return NodeRef(process)
        return ep

    merged: dict[tuple, Edge] = {}
    order: list[tuple] = []
    id_map: dict[int, tuple] = {}
    for e in sorted(d.edges.values(), key=lambda e: e.id):
        touches = any(isinstance(ep, NodeRef) and ep.node in group for ep in (e.src, e.dst))
        src, dst = remap(e.src), remap(e.dst)
        kind = e.kind
        if isinstance(dst, TimelinePos) and dst.timeline in dropped_timelines:
            continue
        if kind is EdgeKind.ALIAS and (src != e.src or dst != e.dst):
            continue
        if src == NodeRef(process) and dst == NodeRef(process):
            continue
        if touches and kind in DATA_KINDS:
            kind = EdgeKind.DATA_FLOW
        key = (kind, src, dst, e.count)
        if key in merged:
            prev = merged[key]
            prev.origins = prev.origins | e.origins
        else:
            merged[key] = Edge(0, kind, src, dst, e.count, e.origins)
            order.append(key)
        id_map[e.id] = key

    new_ids: dict[tuple, int] = {}
    for key in order:
        e = merged[key]
        e.id = out._next_edge
        out._next_edge += 1
        new_ids[key] = e.id
        out.edges[e.id] = e
    # gates pointing at edges that vanished are dropped; the rest follow renumbering
    for e in list(out.edges.values()):
        if isinstance(e.dst, EdgeRef):
            target = id_map.get(e.dst.edge)
            if target is None:
                del out.edges[e.id]
            else:
                e.dst = EdgeRef(new_ids[target])
    return out


def splice_out(d: Diagram, nid: int) -> Diagram:
    """Remove a pass-through process, joining its data inputs to its outputs.

    Every (X -> node, node -> Y) pair of data edges becomes DataFlow X -> Y.
    Used to strip copy machinery from full-style call diagrams.
    """
    out = d.copy()
    me = NodeRef(nid)
    ins = [e for e in out.edges.values() if e.dst == me and e.kind in DATA_KINDS]
    outs = [e for e in out.edges.values() if e.src == me and e.kind in DATA_KINDS]
    for e in [e for e in out.edges.values() if me in (e.src, e.dst)]:
        del out.edges[e.id]
    del out.nodes[nid]
    out._idents = {k: v for k, v in out._idents.items() if v != ("node", nid)}
    out.euler = {c: p for c, p in out.euler.items() if nid not in (c, p)}
    for t in out.timelines.values():
        t.dispatches = [x for x in t.dispatches if x.target != nid]
    for a in ins:
        for b in outs:
            _add_merged(out, EdgeKind.DATA_FLOW, a.src, b.dst, a.origins | b.origins)
    return out


def _add_merged(d: Diagram, kind: EdgeKind, src, dst, origins: frozenset) -> Optional[int]:
    for e in d.edges.values():
        if e.kind is kind and e.src == src and e.dst == dst and e.count == 1:
            e.origins = e.origins | origins
            return e.id
    return d.add_edge(kind, src, dst, origins=origins)


def _clone_node(n):
    from dataclasses import replace

    return replace(n, attrs=dict(n.attrs))


def _clone_timeline(t):
    from dataclasses import replace

    return replace(t, dispatches=list(t.dispatches), attrs=dict(t.attrs))
