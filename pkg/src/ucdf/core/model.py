"""The UCDF graph: nodes, edges, timelines and the Euler containment forest.

A :class:`Diagram` is built through its ``add_*`` methods.  Edge endpoint
types are deliberately *not* checked on insertion; broken diagrams have to be
representable so that :func:`ucdf.core.validate.validate` can report on them
and the renderers can draw them for debugging.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Union


class DiagramError(ValueError):
    """Raised when a mutation would break a structural invariant."""


class NodeKind(Enum):
    PROCESS = "process"
    MODULE = "module"
    DECISION = "decision"
    ORJOIN = "orjoin"
    HUMAN = "human"
    COMMENT = "note"
    MARK = "mark"
    HOLDER = "holder"


class HolderKind(Enum):
    STATIC = "static"
    STACK = "stack"
    HEAP = "heap"
    REGISTER = "register"
    FILE = "file"
    DOCUMENT = "document"
    COLLECTION = "collection"
    ADDRESS = "address"
    CONSTANT = "const"


class EdgeKind(Enum):
    # declaration order is the canonical serialization order
    DATA_UPDATE = "update"
    DATA_READ = "read"
    DATA_FLOW = "flow"
    CREATE = "create"
    DESTROY = "destroy"
    CONTROL_PAR = "par"
    CONTROL_RETURN = "return"
    EXCEPTION = "exception"
    HAS = "has"
    IS = "is"
    ALIAS = "alias"
    REF = "ref"
    COMMENT_ATTACH = "comment"
    GATE = "gate"

    @property
    def order(self) -> int:
        return _EDGE_ORDER[self]


_EDGE_ORDER = {k: i for i, k in enumerate(EdgeKind)}

DATA_KINDS = frozenset({EdgeKind.DATA_UPDATE, EdgeKind.DATA_READ, EdgeKind.DATA_FLOW})
LIFECYCLE_KINDS = frozenset({EdgeKind.CREATE, EdgeKind.DESTROY})

MARKERS = ("start", "stop", "done")

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class NodeRef:
    node: int


@dataclass(frozen=True, order=True)
class TimelinePos:
    timeline: int
    rank: int


@dataclass(frozen=True, order=True)
class EdgeRef:
    edge: int


Endpoint = Union[NodeRef, TimelinePos, EdgeRef]


def endpoint_key(ep: Endpoint) -> tuple:
    if isinstance(ep, NodeRef):
        return (0, ep.node)
    if isinstance(ep, TimelinePos):
        return (1, ep.timeline, ep.rank)
    return (2, ep.edge)


@dataclass
class DiagramNode:
    id: int
    kind: NodeKind
    ident: str
    holder: Optional[HolderKind] = None
    name: str = ""
    content: str = ""
    as_process: bool = False
    # in-memory annotations (extractor provenance); never serialized
    attrs: dict = field(default_factory=dict, compare=False)

    @property
    def is_holder(self) -> bool:
        return self.kind is NodeKind.HOLDER

    @property
    def is_process_like(self) -> bool:
        if self.kind in (NodeKind.PROCESS, NodeKind.MODULE, NodeKind.DECISION, NodeKind.HUMAN):
            return True
        return self.holder is HolderKind.DOCUMENT and self.as_process

    @property
    def full_kind(self) -> tuple:
        return (self.kind, self.holder)

    @property
    def label(self) -> str:
        return self.name or self.ident


@dataclass
class Edge:
    id: int
    kind: EdgeKind
    src: Endpoint
    dst: Endpoint
    count: int = 1
    origins: frozenset = field(default_factory=frozenset, compare=False)


@dataclass(frozen=True)
class OrderMark:
    rank: int
    label: str


@dataclass
class Dispatch:
    mark: OrderMark
    target: int
    origin: Optional[int] = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return self.mark.rank


@dataclass
class Timeline:
    id: int
    ident: str
    owner: Optional[int]  # None means a processor-level Root timeline
    root_label: str = ""
    dispatches: list = field(default_factory=list)
    markers: frozenset = frozenset()
    attrs: dict = field(default_factory=dict, compare=False)

    @property
    def is_root(self) -> bool:
        return self.owner is None

    @property
    def ranks(self) -> list:
        return [d.mark.rank for d in self.dispatches]

    def dispatch_at(self, rank: int) -> Optional[Dispatch]:
        for d in self.dispatches:
            if d.mark.rank == rank:
                return d
        return None

    @property
    def end_rank(self) -> int:
        """Rank one past the last dispatch; a legal return target only when 'done' is marked."""
        return (max(self.ranks) if self.dispatches else 0) + 1


class Diagram:
    def __init__(self) -> None:
        self.nodes: dict[int, DiagramNode] = {}
        self.edges: dict[int, Edge] = {}
        self.timelines: dict[int, Timeline] = {}
        self.euler: dict[int, int] = {}
        # free-text '//' remarks from .ucdf files, keyed by the element they precede
        self.remarks: dict[tuple, list[str]] = {}
        self._next_node = 1
        self._next_edge = 1
        self._next_timeline = 1
        self._idents: dict[str, tuple] = {}

    # construction ---------------------------------------------------------

    def _claim_ident(self, ident: Optional[str], default: str, what: tuple) -> str:
        if ident is None:
            ident = default
            while ident in self._idents:
                ident = "_" + ident
        if not IDENT_RE.match(ident):
            raise DiagramError(f"malformed identifier {ident!r}")
        if ident in self._idents:
            raise DiagramError(f"duplicate identifier {ident!r}")
        self._idents[ident] = what
        return ident

    def add_node(
        self,
        kind: Union[NodeKind, HolderKind],
        name: str = "",
        content: str = "",
        *,
        holder: Optional[HolderKind] = None,
        as_process: bool = False,
        ident: Optional[str] = None,
        attrs: Optional[dict] = None,
    ) -> int:
        if isinstance(kind, HolderKind):
            kind, holder = NodeKind.HOLDER, kind
        if kind is NodeKind.HOLDER and holder is None:
            raise DiagramError("holder nodes need a HolderKind")
        if kind is not NodeKind.HOLDER and holder is not None:
            raise DiagramError(f"{kind.value} nodes take no HolderKind")
        if as_process and holder is not HolderKind.DOCUMENT:
            raise DiagramError("as_process is only allowed on document holders")
        for text in (name, content):
            if not isinstance(text, str):
                raise DiagramError("name and content must be text")
        nid = self._next_node
        ident = self._claim_ident(ident, f"n{nid}", ("node", nid))
        self.nodes[nid] = DiagramNode(
            nid, kind, ident, holder, name, content, as_process, dict(attrs or {})
        )
        self._next_node += 1
        return nid

    def _check_endpoint(self, ep: Endpoint) -> None:
        if isinstance(ep, NodeRef):
            ok = ep.node in self.nodes
        elif isinstance(ep, TimelinePos):
            ok = ep.timeline in self.timelines
        elif isinstance(ep, EdgeRef):
            ok = ep.edge in self.edges
        else:
            raise DiagramError(f"not an endpoint: {ep!r}")
        if not ok:
            raise DiagramError(f"unresolved endpoint {ep!r}")

    def add_edge(
        self,
        kind: EdgeKind,
        src: Union[Endpoint, int],
        dst: Union[Endpoint, int],
        count: int = 1,
        origins: Iterable[int] = (),
        *,
        _allow_forward_edge_ref: bool = False,
    ) -> int:
        src = NodeRef(src) if isinstance(src, int) else src
        dst = NodeRef(dst) if isinstance(dst, int) else dst
        for ep in (src, dst):
            if isinstance(ep, EdgeRef) and _allow_forward_edge_ref:
                continue
            self._check_endpoint(ep)
        eid = self._next_edge
        self.edges[eid] = Edge(eid, kind, src, dst, count, frozenset(origins))
        self._next_edge += 1
        return eid

    def add_timeline(
        self,
        owner: Optional[int],
        markers: Iterable[str] = (),
        *,
        root_label: str = "",
        ident: Optional[str] = None,
        attrs: Optional[dict] = None,
        check_owner: bool = True,
    ) -> int:
        markers = frozenset(markers)
        bad = markers - set(MARKERS)
        if bad:
            raise DiagramError(f"unknown timeline markers {sorted(bad)}")
        if owner is not None:
            if owner not in self.nodes:
                raise DiagramError(f"unresolved timeline owner {owner}")
            if check_owner and not self.nodes[owner].is_process_like:
                raise DiagramError(f"timeline owner {self.nodes[owner].ident} is not process-like")
        tid = self._next_timeline
        ident = self._claim_ident(ident, f"t{tid}", ("timeline", tid))
        self.timelines[tid] = Timeline(tid, ident, owner, root_label, [], markers, dict(attrs or {}))
        self._next_timeline += 1
        return tid

    def append_dispatch(
        self,
        timeline: int,
        rank: int,
        target: int,
        label: Optional[str] = None,
        origin: Optional[int] = None,
    ) -> None:
        tl = self.timelines.get(timeline)
        if tl is None:
            raise DiagramError(f"unknown timeline {timeline}")
        if target not in self.nodes:
            raise DiagramError(f"unresolved dispatch target {target}")
        if rank < 1:
            raise DiagramError("order mark ranks start at 1")
        if tl.dispatches and rank <= tl.dispatches[-1].mark.rank:
            raise DiagramError(
                f"rank {rank} does not exceed {tl.dispatches[-1].mark.rank} on {tl.ident}"
            )
        label = str(rank) if label is None else label
        if not label:
            raise DiagramError("order mark label must be non-empty")
        tl.dispatches.append(Dispatch(OrderMark(rank, label), target, origin))

    def set_container(self, child: int, parent: int) -> None:
        """Record Euler containment (child drawn inside parent)."""
        for n in (child, parent):
            if n not in self.nodes:
                raise DiagramError(f"unresolved node {n}")
        if child in self.euler and self.euler[child] != parent:
            raise DiagramError(f"{self.nodes[child].ident} already has an Euler parent")
        self.euler[child] = parent

    # lookup ---------------------------------------------------------------

    def lookup(self, ident: str) -> Optional[tuple]:
        return self._idents.get(ident)

    def node_by_ident(self, ident: str) -> Optional[DiagramNode]:
        hit = self._idents.get(ident)
        return self.nodes[hit[1]] if hit and hit[0] == "node" else None

    def timeline_by_ident(self, ident: str) -> Optional[Timeline]:
        hit = self._idents.get(ident)
        return self.timelines[hit[1]] if hit and hit[0] == "timeline" else None

    def is_process_like(self, nid: int) -> bool:
        n = self.nodes.get(nid)
        return n is not None and n.is_process_like

    def is_holder(self, nid: int) -> bool:
        n = self.nodes.get(nid)
        return n is not None and n.is_holder

    def edges_of(self, *kinds: EdgeKind) -> Iterator[Edge]:
        for e in self.edges.values():
            if not kinds or e.kind in kinds:
                yield e

    def timelines_owned_by(self, nid: int) -> list[Timeline]:
        return [t for t in self.timelines.values() if t.owner == nid]

    def dispatch_sources(self, nid: int) -> list[tuple[Timeline, Dispatch]]:
        return [(t, d) for t in self.timelines.values() for d in t.dispatches if d.target == nid]

    def copy(self) -> "Diagram":
        return copy.deepcopy(self)

    def describe(self, ep: Endpoint) -> str:
        if isinstance(ep, NodeRef):
            n = self.nodes.get(ep.node)
            return n.ident if n else f"?n{ep.node}"
        if isinstance(ep, TimelinePos):
            t = self.timelines.get(ep.timeline)
            return f"{t.ident if t else '?t'}:{ep.rank}"
        return f"edge {self.canonical_edge_index().get(ep.edge, ep.edge)}"

    # canonical ordering -----------------------------------------------------

    def _edge_sort_key(self, e: Edge, depth: int = 0) -> tuple:
        def ep_key(ep: Endpoint) -> tuple:
            if isinstance(ep, EdgeRef):
                target = self.edges.get(ep.edge)
                if target is None or depth > 0:
                    return (2, (), ep.edge)
                return (2, self._edge_sort_key(target, depth + 1), ep.edge)
            return endpoint_key(ep)

        return (e.kind.order, ep_key(e.src), ep_key(e.dst), e.count)

    def canonical_edges(self) -> list[Edge]:
        return sorted(self.edges.values(), key=lambda e: (self._edge_sort_key(e), e.id))

    def canonical_edge_index(self) -> dict[int, int]:
        """Edge id -> 1-based position in canonical order (the ``edge N`` syntax)."""
        return {e.id: i for i, e in enumerate(self.canonical_edges(), start=1)}


def new_diagram() -> Diagram:
    return Diagram()


def structural_form(d: Diagram) -> tuple:
    """A hashable value equal for structurally equal diagrams.

    Node, timeline ids and the Euler map compare verbatim.  Edges compare in
    canonical order with edge references rewritten to canonical positions,
    since edge ids are not part of the textual form.
    """
    index = d.canonical_edge_index()

    def ep(e: Endpoint):
        return ("edge", index.get(e.edge)) if isinstance(e, EdgeRef) else e

    nodes = tuple(
        (n.id, n.kind, n.holder, n.ident, n.name, n.content, n.as_process)
        for n in sorted(d.nodes.values(), key=lambda n: n.id)
    )
    timelines = tuple(
        (t.id, t.ident, t.owner, t.root_label, t.markers,
         tuple((x.mark.rank, x.mark.label, x.target) for x in t.dispatches))
        for t in sorted(d.timelines.values(), key=lambda t: t.id)
    )
    edges = tuple((e.kind, ep(e.src), ep(e.dst), e.count) for e in d.canonical_edges())
    remarks = tuple(sorted(
        ((k[0], index.get(k[1])) if k[0] == "edge" else k, tuple(v)) for k, v in d.remarks.items()
    ))
    return nodes, timelines, tuple(sorted(d.euler.items())), edges, remarks


def structurally_equal(a: Diagram, b: Diagram) -> bool:
    return structural_form(a) == structural_form(b)
