"""Semantic checking of a diagram against the closed UCDF rule set.

Each rule code is stable and part of the public contract:

========  ==============================================================
R-CTL-01  control (dispatch, ControlPar, ControlReturn source, ExceptionCtl,
          timeline owner) touches something that is not process-like;
          OrJoin is accepted as a dispatch target and as a ControlPar end
R-CTL-02  ControlReturn destination is not a timeline position, the rank is
          absent, a timeline position is used anywhere else, or ranks on a
          timeline do not strictly increase
R-DAT-01  DataUpdate not process -> holder
R-DAT-02  DataRead not holder -> process
R-DAT-03  DataFlow endpoint is a comment, mark or OR node (or not a node)
R-CRE-01  Create/Destroy not process -> holder
R-REF-01  Ref source is not an address holder, or the same address refers to
          the same entity twice
R-HAS-01  the part-of graph (Has plus Euler) has a cycle through a Has edge
R-EUL-01  the Euler containment map has a cycle
R-MIX-01  a node is a Has-part and an Euler-part of different parents
R-ALI-01  Alias joins nodes of different kinds, or its count is below 1
R-ORJ-01  OR node with data edges, or with fewer than two control exits
R-GTE-01  Gate not process -> data/parallel-control edge, or an edge
          reference used anywhere else
R-CMT-01  CommentAttach source is not a comment
R-TLM-01  a timeline is marked both 'stop' and 'done'
========  ==============================================================
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .model import (
    DATA_KINDS,
    Diagram,
    EdgeKind,
    EdgeRef,
    Endpoint,
    HolderKind,
    NodeKind,
    NodeRef,
    TimelinePos,
    endpoint_key,
)

RULE_CODES = (
    "R-ALI-01",
    "R-CMT-01",
    "R-CRE-01",
    "R-CTL-01",
    "R-CTL-02",
    "R-DAT-01",
    "R-DAT-02",
    "R-DAT-03",
    "R-EUL-01",
    "R-GTE-01",
    "R-HAS-01",
    "R-MIX-01",
    "R-ORJ-01",
    "R-REF-01",
    "R-TLM-01",
)


@dataclass(frozen=True)
class Violation:
    rule_code: str
    message: str
    subject: tuple

    def sort_key(self) -> tuple:
        return (self.rule_code, tuple(endpoint_key(s) for s in self.subject), self.message)

    def render(self, d: Diagram) -> str:
        who = " ".join(d.describe(s) for s in self.subject)
        return f"{self.rule_code} {self.message} [{who}]"


class _Checker:
    def __init__(self, d: Diagram) -> None:
        self.d = d
        self.out: list[Violation] = []

    def flag(self, code: str, message: str, *subject: Endpoint) -> None:
        self.out.append(Violation(code, message, tuple(subject)))

    def node(self, ep: Endpoint):
        return self.d.nodes.get(ep.node) if isinstance(ep, NodeRef) else None

    def proc(self, ep: Endpoint) -> bool:
        n = self.node(ep)
        return n is not None and n.is_process_like

    def holder(self, ep: Endpoint) -> bool:
        n = self.node(ep)
        return n is not None and n.is_holder

    def of_kind(self, ep: Endpoint, *kinds: NodeKind) -> bool:
        n = self.node(ep)
        return n is not None and n.kind in kinds


def validate(d: Diagram) -> list[Violation]:
    c = _Checker(d)
    _check_timelines(c)
    _check_edges(c)
    _check_part_of(c)
    _check_orjoins(c)
    return sorted(set(c.out), key=Violation.sort_key)


def _check_timelines(c: _Checker) -> None:
    d = c.d
    for t in d.timelines.values():
        if t.owner is not None and not d.is_process_like(t.owner):
            c.flag("R-CTL-01", f"timeline {t.ident} is owned by a non-process", NodeRef(t.owner))
        if {"stop", "done"} <= t.markers:
            c.flag("R-TLM-01", f"timeline {t.ident} is marked both stop and done",
                   TimelinePos(t.id, 0))
        last = 0
        for x in t.dispatches:
            pos = TimelinePos(t.id, x.mark.rank)
            if x.mark.rank <= last:
                c.flag("R-CTL-02", f"rank {x.mark.rank} does not increase on {t.ident}", pos)
            last = max(last, x.mark.rank)
            n = d.nodes.get(x.target)
            if n is None or not (n.is_process_like or n.kind is NodeKind.ORJOIN):
                c.flag("R-CTL-01", "dispatch target is not a process", pos, NodeRef(x.target))


def _check_edges(c: _Checker) -> None:
    d = c.d
    K = EdgeKind
    refs_seen: set = set()
    for e in sorted(d.edges.values(), key=lambda e: e.id):
        me = EdgeRef(e.id)
        # endpoint shapes: positions only as ControlReturn dst, edge refs only as Gate dst
        for end, ep in (("src", e.src), ("dst", e.dst)):
            if isinstance(ep, TimelinePos) and not (end == "dst" and e.kind is K.CONTROL_RETURN):
                c.flag("R-CTL-02", f"timeline position used as {e.kind.value} {end}", me)
            if isinstance(ep, EdgeRef) and not (end == "dst" and e.kind is K.GATE):
                c.flag("R-GTE-01", f"edge reference used as {e.kind.value} {end}", me)

        if e.kind is K.CONTROL_PAR:
            for ep in (e.src, e.dst):
                if not (c.proc(ep) or c.of_kind(ep, NodeKind.ORJOIN)):
                    c.flag("R-CTL-01", "parallel control between non-processes", me)
                    break
        elif e.kind is K.CONTROL_RETURN:
            if not c.proc(e.src):
                c.flag("R-CTL-01", "returning block is not a process", me)
            if isinstance(e.dst, TimelinePos):
                t = d.timelines.get(e.dst.timeline)
                rank = e.dst.rank
                present = t is not None and (
                    rank in t.ranks or ("done" in t.markers and rank == t.end_rank)
                )
                if not present:
                    c.flag("R-CTL-02", f"return to absent rank {rank}", me)
            elif not isinstance(e.dst, EdgeRef):
                c.flag("R-CTL-02", "return destination is not a timeline position", me)
        elif e.kind is K.EXCEPTION:
            if not (c.proc(e.src) and c.proc(e.dst)):
                c.flag("R-CTL-01", "exception control between non-processes", me)
        elif e.kind is K.DATA_UPDATE:
            if not (c.proc(e.src) and c.holder(e.dst)):
                c.flag("R-DAT-01", "update must go from a process to a holder", me)
        elif e.kind is K.DATA_READ:
            if not (c.holder(e.src) and c.proc(e.dst)):
                c.flag("R-DAT-02", "read must go from a holder to a process", me)
        elif e.kind is K.DATA_FLOW:
            for ep in (e.src, e.dst):
                n = c.node(ep)
                if isinstance(ep, NodeRef) and (
                    n is None or n.kind in (NodeKind.COMMENT, NodeKind.MARK, NodeKind.ORJOIN)
                ):
                    c.flag("R-DAT-03", "data flow touches a comment, mark or OR node", me)
                    break
        elif e.kind in (K.CREATE, K.DESTROY):
            if not (c.proc(e.src) and c.holder(e.dst)):
                c.flag("R-CRE-01", f"{e.kind.value} must go from a process to a holder", me)
        elif e.kind is K.REF:
            n = c.node(e.src)
            if n is None or n.holder is not HolderKind.ADDRESS:
                c.flag("R-REF-01", "reference source is not an address holder", me)
            elif (e.src, e.dst) in refs_seen:
                c.flag("R-REF-01", "address refers to the same entity twice", me)
            refs_seen.add((e.src, e.dst))
        elif e.kind is K.ALIAS:
            a, b = c.node(e.src), c.node(e.dst)
            if a is None or b is None or a.full_kind != b.full_kind or e.count < 1:
                c.flag("R-ALI-01", "alias joins different kinds or has count < 1", me)
        elif e.kind is K.GATE:
            target = d.edges.get(e.dst.edge) if isinstance(e.dst, EdgeRef) else None
            if (
                not c.proc(e.src)
                or target is None
                or target.kind not in DATA_KINDS | {K.CONTROL_PAR}
            ):
                c.flag("R-GTE-01", "gate must go from a process to a data or parallel edge", me)
        elif e.kind is K.COMMENT_ATTACH:
            if not c.of_kind(e.src, NodeKind.COMMENT):
                c.flag("R-CMT-01", "comment attachment does not start at a comment", me)


def _check_part_of(c: _Checker) -> None:
    d = c.d
    has_parent: dict[int, set] = {}
    g = nx.DiGraph()
    has_pairs = set()
    for e in d.edges_of(EdgeKind.HAS):
        if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
            g.add_edge(e.dst.node, e.src.node)  # part -> whole
            has_pairs.add((e.dst.node, e.src.node))
            has_parent.setdefault(e.dst.node, set()).add(e.src.node)
    g.add_edges_from(d.euler.items())

    for comp in nx.strongly_connected_components(g):
        members = sorted(comp)
        cyclic = len(members) > 1 or g.has_edge(members[0], members[0])
        if not cyclic:
            continue
        sub = [(a, b) for (a, b) in g.subgraph(members).edges()]
        subject = [NodeRef(n) for n in members]
        if any(p in has_pairs for p in sub):
            c.flag("R-HAS-01", "part-of relation is cyclic", *subject)
        else:
            c.flag("R-EUL-01", "Euler containment is not a forest", *subject)

    for child, parents in sorted(has_parent.items()):
        ep = d.euler.get(child)
        if ep is not None and any(p != ep for p in parents):
            c.flag("R-MIX-01", "node is part of two different parents", NodeRef(child))


def _check_orjoins(c: _Checker) -> None:
    d = c.d
    for n in sorted(d.nodes.values(), key=lambda n: n.id):
        if n.kind is not NodeKind.ORJOIN:
            continue
        me = NodeRef(n.id)
        touching = [
            e for e in d.edges.values()
            if (e.src == me or e.dst == me) and e.kind in DATA_KINDS | {EdgeKind.CREATE, EdgeKind.DESTROY}
        ]
        exits = [e for e in d.edges_of(EdgeKind.CONTROL_PAR) if e.src == me]
        if touching or len(exits) < 2:
            c.flag("R-ORJ-01", "OR node must carry only control with at least two exits", me)
