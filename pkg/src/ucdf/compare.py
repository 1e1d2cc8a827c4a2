"""Cross-diagram comparison for extracted diagrams.

Node ids differ between granularities and call styles, so comparisons go
through the extractor's ``attrs["key"]`` annotation.  A keyed view reduces a
diagram to key-level facts; data edges of every kind collapse to one class
because contraction turns reads and updates into abstract flows.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .core import DATA_KINDS, Diagram, EdgeKind, NodeRef, TimelinePos, contract, splice_out

CONTAINER_PREFIXES = ("fn:", "block:", "catch:")


def _key(d: Diagram, nid: int) -> str:
    return d.nodes[nid].attrs.get("key", d.nodes[nid].ident)


def keyed_view(d: Diagram, keep: Optional[set[str]] = None) -> dict[str, frozenset]:
    """Key-level nodes, non-control edges, timelines and returning edges.

    With ``keep`` given, timeline sequences list only kept targets and
    return positions are expressed relative to kept dispatches.
    """

    def kept(nid: int) -> bool:
        return keep is None or _key(d, nid) in keep

    def position(tp: TimelinePos) -> tuple:
        t = d.timelines[tp.timeline]
        before = [x for x in t.dispatches if x.rank < tp.rank and kept(x.target)]
        owner = _key(d, t.owner) if t.owner is not None else "root"
        return (owner, _key(d, before[-1].target) if before else None)

    nodes = frozenset((_key(d, n.id), n.kind.value, n.holder.value if n.holder else None)
                      for n in d.nodes.values() if kept(n.id))
    edges = set()
    returns = set()
    for e in d.edges.values():
        if e.kind is EdgeKind.CONTROL_RETURN:
            if isinstance(e.src, NodeRef) and isinstance(e.dst, TimelinePos):
                returns.add((_key(d, e.src.node), position(e.dst)))
            continue
        if not (isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef)):
            continue
        cls = "data" if e.kind in DATA_KINDS else e.kind.value
        edges.add((cls, _key(d, e.src.node), _key(d, e.dst.node), e.count))
    for child, parent in d.euler.items():
        edges.add(("euler", _key(d, child), _key(d, parent), 1))
    timelines = set()
    for t in d.timelines.values():
        owner = _key(d, t.owner) if t.owner is not None else "root"
        seq = tuple(_key(d, x.target) for x in t.dispatches if kept(x.target))
        timelines.add((owner, t.root_label, seq))
    return {
        "nodes": nodes,
        "edges": frozenset(edges),
        "timelines": frozenset(timelines),
        "returns": frozenset(returns),
    }


def diff_views(a: dict, b: dict, parts: Iterable[str] = ("nodes", "edges", "timelines", "returns"),
               names: tuple[str, str] = ("left", "right")) -> list[str]:
    out = []
    for part in parts:
        for item in sorted(a[part] - b[part], key=repr):
            out.append(f"{part} only in {names[0]}: {item}")
        for item in sorted(b[part] - a[part], key=repr):
            out.append(f"{part} only in {names[1]}: {item}")
    return out


def coarsen(fine: Diagram, keep: set[str]) -> Diagram:
    """Contract every container process of ``fine`` whose key is in ``keep``.

    Nodes whose key is not in ``keep`` are absorbed into their container;
    kept nodes are neither absorbed nor traversed.
    """
    keep_ids = {n.id for n in fine.nodes.values() if _key(fine, n.id) in keep}
    containers = sorted(n for n in keep_ids
                        if _key(fine, n).startswith(CONTAINER_PREFIXES))
    out = fine
    for nid in containers:
        if nid in out.nodes:
            out = contract(out, nid, keep=keep_ids)
    return out


def check_coarsening(fine: Diagram, coarse: Diagram) -> list[str]:
    """Differences between ``coarse`` and ``fine`` contracted down to it (empty when coherent)."""
    keep = {_key(coarse, n) for n in coarse.nodes}
    missing = keep - {_key(fine, n) for n in fine.nodes}
    out = [f"node {k} missing from the finer diagram" for k in sorted(missing)]
    contracted = keyed_view(coarsen(fine, keep))
    filtered = keyed_view(fine, keep)
    target = keyed_view(coarse)
    out += diff_views(contracted, target, ("nodes", "edges"), ("contracted", "coarse"))
    out += diff_views(filtered, target, ("timelines", "returns"), ("finer", "coarse"))
    return out


def strip_copies(full: Diagram) -> Diagram:
    """Remove the copy steps of a full-style call diagram."""
    out = full
    for nid in sorted(full.nodes):
        if _key(full, nid).startswith("copy:"):
            out = splice_out(out, nid)
    return out


def check_call_styles(simplified: Diagram, full: Diagram) -> list[str]:
    return diff_views(keyed_view(strip_copies(full)), keyed_view(simplified),
                      names=("full", "simplified"))


def unalias(d: Diagram) -> Diagram:
    """Point every dispatch at its canonical node and drop alias copies."""
    out = d.copy()
    copies = {n.id: n.attrs["alias_of"] for n in out.nodes.values() if "alias_of" in n.attrs}
    for t in out.timelines.values():
        for x in t.dispatches:
            x.target = copies.get(x.target, x.target)
    for eid in [e.id for e in out.edges.values() if e.kind is EdgeKind.ALIAS]:
        del out.edges[eid]
    for nid in copies:
        del out._idents[out.nodes[nid].ident]
        del out.nodes[nid]
    return out
