"""Graphviz DOT emitter.

Order marks become small square nodes chained along their timeline, so a
ControlReturn edge has a concrete node to point at.  Edges that are the
target of a Gate are split through a point node at their midpoint.
"""

from __future__ import annotations

from ..core import Diagram, EdgeKind, EdgeRef, NodeKind, NodeRef, TimelinePos, validate
from .style import DEFAULT_STYLE, EdgeStyle, NodeStyle, StyleTable

FONT = "Helvetica"


class RenderRefused(ValueError):
    """The diagram has rule violations and rendering was not forced."""

    def __init__(self, violations) -> None:
        super().__init__(f"diagram has {len(violations)} violation(s)")
        self.violations = violations


def check_renderable(d: Diagram, force: bool) -> None:
    if not force:
        found = validate(d)
        if found:
            raise RenderRefused(found)


def q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _html(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


class Html(str):
    """An HTML-like label, emitted without quoting."""


def attrs(pairs: list[tuple[str, str]]) -> str:
    parts = []
    for k, v in pairs:
        parts.append(f"{k}={v}" if isinstance(v, Html) else f"{k}={q(v)}")
    return "[" + ", ".join(parts) + "]"


def node_text(n, style: NodeStyle) -> str:
    text = n.label
    if n.kind is NodeKind.ORJOIN:
        text = "OR"
    if style.decor == "menu":
        text = "☰ " + text
    elif style.decor == "star":
        text = "★ " + text
    if n.content:
        text += "\n" + n.content
    return text


def node_attrs(n, style: NodeStyle) -> list[tuple[str, str]]:
    text = node_text(n, style)
    if style.decor == "underline":
        lines = [_html(x) for x in text.split("\n")]
        label = Html("<<U>" + lines[0] + "</U>" + "".join("<BR/>" + x for x in lines[1:]) + ">")
    else:
        label = text
    out = [("label", label), ("shape", style.shape)]
    looks = []
    if style.border in ("dashed", "dotted", "bold"):
        looks.append(style.border)
    if style.border == "none":
        out.append(("penwidth", "0"))
    if style.border == "double" or style.decor in ("double-sides", "bold-double"):
        out.append(("peripheries", "2"))
    if style.decor == "bold-double":
        looks.append("bold")
    if style.decor == "wavy":
        looks.append("diagonals")
    if style.decor == "small":
        out += [("width", "0.3"), ("height", "0.2"), ("fontsize", "9")]
    if style.fill != "white":
        looks.append("filled")
        out.append(("fillcolor", style.fill))
    if looks:
        out.append(("style", ",".join(looks)))
    return out


_LINE = {
    "solid": [],
    "thin": [("penwidth", "1")],
    "dashed": [("style", "dashed")],
    "dotted": [("style", "dotted")],
    "bold": [("style", "bold"), ("penwidth", "2")],
    "bold-dashed": [("style", "bold,dashed"), ("penwidth", "2")],
    # DOT has no dash-dot pattern; the SVG emitter draws the real one
    "dashdot": [("style", "dashed"), ("penwidth", "1.5")],
}

_HEAD = {
    "normal": [("arrowhead", "normal")],
    "open": [("arrowhead", "onormal")],
    "both": [("dir", "both"), ("arrowhead", "normal"), ("arrowtail", "normal")],
    "none": [("arrowhead", "none")],
    "dot": [("arrowhead", "dot")],
}


def edge_label(style: EdgeStyle, count: int) -> str:
    if style.label == "count":
        return str(count)
    text = style.label
    if count > 1:
        text = f"{text} ×{count}".strip()
    return text


def edge_attrs(style: EdgeStyle, count: int = 1, head: bool = True) -> list[tuple[str, str]]:
    out = list(_LINE[style.line])
    out += _HEAD[style.head] if head else [("arrowhead", "none")]
    label = edge_label(style, count)
    if label:
        out.append(("label", label))
    return out


def mark_id(t, rank: int) -> str:
    return f"{t.ident}#{rank}"


def marker_id(t, marker: str) -> str:
    return f"{t.ident}#{marker}"


def emit_dot(d: Diagram, style: StyleTable = DEFAULT_STYLE, force: bool = False) -> str:
    check_renderable(d, force)
    lines = [
        "digraph ucdf {",
        f"  graph [fontname={q(FONT)}, compound=true];",
        f"  node [fontname={q(FONT)}];",
        f"  edge [fontname={q(FONT)}];",
    ]
    children: dict[int, list[int]] = {}
    for c, p in d.euler.items():
        children.setdefault(p, []).append(c)

    def emit_node(nid: int, depth: int) -> None:
        n = d.nodes[nid]
        pad = "  " * depth
        ns = style.node(n)
        if nid in children:
            lines.append(f"{pad}subgraph {q('cluster_' + n.ident)} {{")
            lines.append(f"{pad}  label={q(n.label)};")
            if ns.border in ("dashed", "dotted"):
                lines.append(f"{pad}  style={q(ns.border)};")
            lines.append(f"{pad}  {q(n.ident)} {attrs(node_attrs(n, ns))};")
            for c in sorted(children[nid]):
                emit_node(c, depth + 1)
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}{q(n.ident)} {attrs(node_attrs(n, ns))};")

    for nid in sorted(d.nodes):
        if nid not in d.euler:
            emit_node(nid, 1)

    chain_style = attrs(edge_attrs(style.edge("timeline")))
    dispatch_style = attrs(edge_attrs(style.edge("dispatch")))
    for tid in sorted(d.timelines):
        t = d.timelines[tid]
        chain = []
        if t.owner is None:
            head = marker_id(t, "root")
            lines.append(f"  {q(head)} {attrs([('label', t.root_label or 'Root'), ('shape', 'plaintext')])};")
            chain.append(head)
        else:
            chain.append(d.nodes[t.owner].ident)
        if "start" in t.markers:
            m = marker_id(t, "start")
            lines.append(f"  {q(m)} {attrs([('label', 'start'), ('shape', 'plaintext')])};")
            chain.append(m)
        for x in t.dispatches:
            m = mark_id(t, x.rank)
            lines.append(f"  {q(m)} {attrs([('label', x.mark.label), ('shape', 'square'), ('fontsize', '9'), ('width', '0.25'), ('fixedsize', 'true')])};")
            chain.append(m)
        for marker in ("stop", "done"):
            if marker in t.markers:
                m = marker_id(t, marker)
                lines.append(f"  {q(m)} {attrs([('label', marker), ('shape', 'plaintext')])};")
                chain.append(m)
        for a, b in zip(chain, chain[1:]):
            lines.append(f"  {q(a)} -> {q(b)} {chain_style};")
        for x in t.dispatches:
            lines.append(f"  {q(mark_id(t, x.rank))} -> {q(d.nodes[x.target].ident)} {dispatch_style};")

    index = d.canonical_edge_index()
    split = {ep.edge for e in d.edges.values() for ep in (e.src, e.dst) if isinstance(ep, EdgeRef)}

    def endpoint(ep) -> str:
        if isinstance(ep, NodeRef):
            return d.nodes[ep.node].ident
        if isinstance(ep, TimelinePos):
            t = d.timelines[ep.timeline]
            if t.dispatch_at(ep.rank) is not None:
                return mark_id(t, ep.rank)
            return marker_id(t, "done")
        return f"e{index[ep.edge]}#mid"

    for e in d.canonical_edges():
        es = style.edge(e.kind)
        src, dst = q(endpoint(e.src)), q(endpoint(e.dst))
        if e.id in split:
            mid = q(f"e{index[e.id]}#mid")
            lines.append(f"  {mid} {attrs([('label', ''), ('shape', 'point'), ('width', '0.05')])};")
            lines.append(f"  {src} -> {mid} {attrs(edge_attrs(es, e.count, head=False))};")
            lines.append(f"  {mid} -> {dst} {attrs(edge_attrs(es))};")
        else:
            lines.append(f"  {src} -> {dst} {attrs(edge_attrs(es, e.count))};")
        if e.kind is EdgeKind.CONTROL_RETURN and isinstance(e.dst, TimelinePos):
            t = d.timelines[e.dst.timeline]
            if t.dispatch_at(e.dst.rank) is None and "done" not in t.markers:
                # forced render of an invalid return target
                lines.append(f"  {dst} {attrs([('label', 'done'), ('shape', 'plaintext')])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
