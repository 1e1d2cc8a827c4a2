"""Self-contained SVG emitter on a deterministic layered grid.

Layout rules: a node sits above the band of each timeline it owns; the order
mark of rank r on a timeline owned by a node whose left edge is at x is
drawn centred on x + r * CELL (x is MARGIN at the top level);
dispatch targets go one row under their mark.  Holders are stacked to the
right of their Has or Euler parent, comments next to the element they
annotate, and anything left over goes into a column right of the grid.
Shapes may overlap; layout quality is not a goal.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from ..core import Diagram, EdgeKind, EdgeRef, NodeKind, NodeRef, TimelinePos
from .dot import check_renderable, edge_label
from .style import DEFAULT_STYLE, EdgeStyle, NodeStyle, StyleTable

MARGIN = 40
CELL = 140
ROW = 70
MARK = 16
BOX_W, BOX_H = 110, 36
DEFAULT_CANVAS = (400, 200)

_DASH = {"dashed": "6,4", "dotted": "2,3", "bold-dashed": "8,4", "dashdot": "8,3,2,3"}
_WIDTH = {"thin": 1.0, "solid": 1.5, "dashed": 1.5, "dotted": 1.5, "dashdot": 1.5,
          "bold": 2.5, "bold-dashed": 2.5}
# the timeline chain is drawn heavier than the dispatch lines leaving it
CHAIN_FACTOR = 1.6


def fmt(v: float) -> str:
    s = f"{v:.1f}"
    return s[:-2] if s.endswith(".0") else s


class _Layout:
    def __init__(self, d: Diagram) -> None:
        self.d = d
        self.pos: dict[int, tuple[float, float]] = {}
        self.marks: dict[tuple[int, int], tuple[float, float]] = {}
        self.tl_label: dict[int, tuple[float, float]] = {}
        self.row = 0
        dispatched = {x.target for t in d.timelines.values() for x in t.dispatches}
        tops = [n.id for n in d.nodes.values()
                if n.is_process_like and n.id not in dispatched]
        # owners inside a dispatch cycle are never top-level; place them as tops too
        owners = sorted({t.owner for t in d.timelines.values() if t.owner is not None})
        for nid in sorted(tops) + owners:
            if nid not in self.pos:
                self.row = self.place(nid, MARGIN + BOX_W / 2, self.row) + 1
        for tid in sorted(d.timelines):
            t = d.timelines[tid]
            if t.owner is None:
                self.tl_label[tid] = (MARGIN + BOX_W / 2, self.y(self.row))
                self.row = self.place_timeline(t, MARGIN + BOX_W / 2, self.row) + 1
        self.place_rest()

    @staticmethod
    def y(row: int) -> float:
        return MARGIN + BOX_H / 2 + row * ROW

    def place(self, nid: int, x: float, row: int) -> int:
        """Place a process and its timelines; returns the last row used."""
        self.pos[nid] = (x, self.y(row))
        last = row
        for t in sorted(self.d.timelines_owned_by(nid), key=lambda t: t.id):
            last = self.place_timeline(t, x, last + 1)
        return last

    def place_timeline(self, t, x: float, band: int) -> int:
        last = band
        end = t.end_rank
        left = x - BOX_W / 2
        for rank in [x_.rank for x_ in t.dispatches] + [end]:
            self.marks[(t.id, rank)] = (left + rank * CELL, self.y(band))
        for dx in t.dispatches:
            if dx.target not in self.pos:
                last = max(last, self.place(dx.target, left + dx.rank * CELL, band + 1))
        return max(last, band + 1) if t.dispatches else band

    def place_rest(self) -> None:
        d = self.d
        parent: dict[int, int] = dict(d.euler)
        for e in d.edges_of(EdgeKind.HAS):
            if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
                parent.setdefault(e.dst.node, e.src.node)
        attached: dict[int, int] = {}
        for e in d.edges_of(EdgeKind.COMMENT_ATTACH):
            if isinstance(e.src, NodeRef) and isinstance(e.dst, NodeRef):
                attached.setdefault(e.src.node, e.dst.node)
        max_x = max([p[0] for p in self.pos.values()] + [m[0] for m in self.marks.values()]
                    + [MARGIN + BOX_W / 2])
        free_x = max_x + CELL
        free_row = 0
        slots: dict[int, int] = {}
        pending = sorted(n for n in d.nodes if n not in self.pos)
        while pending:
            progress = False
            rest = []
            for nid in pending:
                anchor = parent.get(nid, attached.get(nid))
                if anchor is not None and anchor in self.pos and anchor != nid:
                    k = slots.get(anchor, 0) + 1
                    slots[anchor] = k
                    ax, ay = self.pos[anchor]
                    self.pos[nid] = (ax + BOX_W / 2 + 20 + BOX_W / 2, ay + (k - 1) * (BOX_H + 8) + 12)
                    progress = True
                elif anchor is not None and anchor in pending and anchor not in self.pos:
                    rest.append(nid)
                else:
                    self.pos[nid] = (free_x, self.y(free_row))
                    free_row += 1
                    progress = True
            if not progress:
                for nid in rest:
                    self.pos[nid] = (free_x, self.y(free_row))
                    free_row += 1
                rest = []
            pending = rest


def _size(n, ns: NodeStyle) -> tuple[float, float]:
    if ns.decor == "small":
        return BOX_W * 0.55, BOX_H * 0.6
    if n.kind is NodeKind.ORJOIN:
        return BOX_W * 0.45, BOX_H * 0.8
    return BOX_W, BOX_H


def _stroke(border: str) -> str:
    if border == "none":
        return 'stroke="none"'
    width = 2.5 if border == "bold" else 1.5
    dash = _DASH.get(border)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'stroke="black" stroke-width="{fmt(width)}"{extra}'


def _wavy_bottom(x0: float, y0: float, w: float, h: float) -> str:
    y1 = y0 + h - 6
    q = w / 4
    return (f"M{fmt(x0)},{fmt(y0)} H{fmt(x0 + w)} V{fmt(y1)} "
            f"Q{fmt(x0 + w - q / 2)},{fmt(y1 - 8)} {fmt(x0 + w - q)},{fmt(y1)} "
            f"T{fmt(x0 + w - 2 * q)},{fmt(y1)} T{fmt(x0 + w - 3 * q)},{fmt(y1)} "
            f"T{fmt(x0)},{fmt(y1)} Z")


def _shape(n, ns: NodeStyle, x: float, y: float) -> list[str]:
    w, h = _size(n, ns)
    x0, y0 = x - w / 2, y - h / 2
    fill = "none" if ns.shape == "plaintext" else ns.fill
    st = _stroke(ns.border if ns.shape != "plaintext" else "none")
    out = []
    if ns.decor in ("menu", "wavy"):
        out.append(f'<path d="{_wavy_bottom(x0, y0, w, h)}" fill="{fill}" {st}/>')
    elif ns.shape == "ellipse":
        out.append(f'<ellipse cx="{fmt(x)}" cy="{fmt(y)}" rx="{fmt(w / 2)}" ry="{fmt(h / 2)}" fill="{fill}" {st}/>')
        if ns.border == "double" or ns.decor == "bold-double":
            out.append(f'<ellipse cx="{fmt(x)}" cy="{fmt(y)}" rx="{fmt(w / 2 - 4)}" ry="{fmt(h / 2 - 4)}" fill="none" {_stroke("bold" if ns.decor == "bold-double" else "solid")}/>')
    elif ns.shape == "diamond":
        pts = f"{fmt(x)},{fmt(y0 - 6)} {fmt(x0 + w)},{fmt(y)} {fmt(x)},{fmt(y0 + h + 6)} {fmt(x0)},{fmt(y)}"
        out.append(f'<polygon points="{pts}" fill="{fill}" {st}/>')
    elif ns.shape == "note":
        pts = (f"{fmt(x0)},{fmt(y0)} {fmt(x0 + w - 10)},{fmt(y0)} {fmt(x0 + w)},{fmt(y0 + 10)} "
               f"{fmt(x0 + w)},{fmt(y0 + h)} {fmt(x0)},{fmt(y0 + h)}")
        out.append(f'<polygon points="{pts}" fill="{fill}" {st}/>')
    elif ns.shape == "folder":
        pts = (f"{fmt(x0)},{fmt(y0)} {fmt(x0 + 30)},{fmt(y0)} {fmt(x0 + 36)},{fmt(y0 + 6)} "
               f"{fmt(x0 + w)},{fmt(y0 + 6)} {fmt(x0 + w)},{fmt(y0 + h)} {fmt(x0)},{fmt(y0 + h)}")
        out.append(f'<polygon points="{pts}" fill="{fill}" {st}/>')
    elif ns.shape == "box":
        out.append(f'<rect x="{fmt(x0)}" y="{fmt(y0)}" width="{fmt(w)}" height="{fmt(h)}" fill="{fill}" {st}/>')
        if ns.border == "double":
            out.append(f'<rect x="{fmt(x0 + 3)}" y="{fmt(y0 + 3)}" width="{fmt(w - 6)}" height="{fmt(h - 6)}" fill="none" {_stroke("solid")}/>')
    if ns.decor == "double-sides":
        for sx in (x0 + 5, x0 + w - 5):
            out.append(f'<line x1="{fmt(sx)}" y1="{fmt(y0)}" x2="{fmt(sx)}" y2="{fmt(y0 + h)}" {_stroke("solid")}/>')
    return out


def _text(n, ns: NodeStyle) -> str:
    text = "OR" if n.kind is NodeKind.ORJOIN else n.label
    if ns.decor == "star":
        text = "★ " + text
    return text


def _clip(x: float, y: float, tx: float, ty: float, w: float, h: float) -> tuple[float, float]:
    """Point where the segment from (x, y) toward (tx, ty) leaves a w-by-h box centred at (x, y)."""
    dx, dy = tx - x, ty - y
    if dx == 0 and dy == 0:
        return x, y
    sx = (w / 2) / abs(dx) if dx else float("inf")
    sy = (h / 2) / abs(dy) if dy else float("inf")
    s = min(sx, sy, 1.0)
    return x + dx * s, y + dy * s


def _line_attrs(es: EdgeStyle, factor: float = 1.0) -> str:
    width = _WIDTH[es.line] * factor
    dash = _DASH.get(es.line)
    out = f'fill="none" stroke="black" stroke-width="{fmt(width)}"'
    if dash:
        out += f' stroke-dasharray="{dash}"'
    return out


def _heads(es: EdgeStyle, head: bool = True) -> str:
    if not head or es.head == "none":
        return ""
    marker = {"normal": "arrow", "open": "open", "both": "arrow", "dot": "dot"}[es.head]
    out = f' marker-end="url(#{marker})"'
    if es.head == "both":
        out += ' marker-start="url(#arrow-start)"'
    return out


_DEFS = [
    "<defs>",
    '<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" '
    'orient="auto"><path d="M0,0 L10,5 L0,10 Z" fill="black"/></marker>',
    '<marker id="arrow-start" viewBox="0 0 10 10" refX="0" refY="5" markerWidth="8" markerHeight="8" '
    'orient="auto"><path d="M10,0 L0,5 L10,10 Z" fill="black"/></marker>',
    '<marker id="open" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" '
    'orient="auto"><path d="M0,0 L10,5 L0,10" fill="none" stroke="black"/></marker>',
    '<marker id="dot" viewBox="0 0 10 10" refX="5" refY="5" markerWidth="6" markerHeight="6">'
    '<circle cx="5" cy="5" r="4" fill="black"/></marker>',
    "</defs>",
]


def emit_svg(d: Diagram, style: StyleTable = DEFAULT_STYLE, force: bool = False) -> str:
    check_renderable(d, force)
    lay = _Layout(d)
    body: list[str] = []
    sizes = {nid: _size(d.nodes[nid], style.node(d.nodes[nid])) for nid in d.nodes}

    # Euler containers: a rounded frame around the parent and its placed children
    children: dict[int, list[int]] = {}
    for c, p in d.euler.items():
        children.setdefault(p, []).append(c)

    def extent(nid: int) -> tuple[float, float, float, float]:
        x, y = lay.pos[nid]
        w, h = sizes[nid]
        box = [x - w / 2, y - h / 2, x + w / 2, y + h / 2]
        for c in children.get(nid, ()):
            cb = extent(c)
            box = [min(box[0], cb[0] - 6), min(box[1], cb[1] - 6),
                   max(box[2], cb[2] + 6), max(box[3], cb[3] + 6)]
        return box[0], box[1], box[2], box[3]

    for p in sorted(children):
        x0, y0, x1, y1 = extent(p)
        body.append(f'<rect class="euler" x="{fmt(x0 - 8)}" y="{fmt(y0 - 16)}" width="{fmt(x1 - x0 + 16)}" '
                    f'height="{fmt(y1 - y0 + 24)}" rx="10" fill="none" stroke="gray" stroke-dasharray="4,3"/>')

    for nid in sorted(d.nodes):
        n = d.nodes[nid]
        ns = style.node(n)
        x, y = lay.pos[nid]
        body.append(f'<g class="node {n.kind.value}" id="{escape(n.ident)}">')
        body += _shape(n, ns, x, y)
        deco = ' text-decoration="underline"' if ns.decor == "underline" else ""
        body.append(f'<text x="{fmt(x)}" y="{fmt(y + 4)}" text-anchor="middle" font-size="11"{deco}>'
                    f"{escape(_text(n, ns))}</text>")
        if n.content:
            body.append(f'<text x="{fmt(x)}" y="{fmt(y + sizes[nid][1] / 2 + 12)}" text-anchor="middle" '
                        f'font-size="9" fill="dimgray">{escape(n.content)}</text>')
        body.append("</g>")

    chain = style.edge("timeline")
    disp = style.edge("dispatch")
    for tid in sorted(d.timelines):
        t = d.timelines[tid]
        body.append(f'<g class="timeline" id="{escape(t.ident)}">')
        if t.owner is None:
            sx, sy = lay.tl_label[tid]
            body.append(f'<text x="{fmt(sx)}" y="{fmt(sy + 4)}" text-anchor="middle" font-size="11">'
                        f"{escape(t.root_label or 'Root')}</text>")
            start = (sx + BOX_W / 2, sy)
        else:
            ox, oy = lay.pos[t.owner]
            start = (ox, oy + sizes[t.owner][1] / 2)
        pts = [start] + [lay.marks[(tid, x.rank)] for x in t.dispatches]
        if "done" in t.markers or "stop" in t.markers:
            pts.append(lay.marks[(tid, t.end_rank)])
        if len(pts) > 1:
            path = " ".join(f"{fmt(px)},{fmt(py)}" for px, py in pts)
            body.append(f'<polyline points="{path}" {_line_attrs(chain, CHAIN_FACTOR)}{_heads(chain)}/>')
        if "start" in t.markers:
            body.append(f'<text x="{fmt(start[0])}" y="{fmt(start[1] + 14)}" font-size="9">start</text>')
        for marker in ("stop", "done"):
            if marker in t.markers:
                mx, my = lay.marks[(tid, t.end_rank)]
                body.append(f'<text x="{fmt(mx)}" y="{fmt(my + 4)}" text-anchor="middle" font-size="9">{marker}</text>')
        for x in t.dispatches:
            mx, my = lay.marks[(tid, x.rank)]
            body.append(f'<rect class="mark" x="{fmt(mx - MARK / 2)}" y="{fmt(my - MARK / 2)}" width="{MARK}" '
                        f'height="{MARK}" fill="white" stroke="black"/>')
            body.append(f'<text x="{fmt(mx)}" y="{fmt(my + 3)}" text-anchor="middle" font-size="8">'
                        f"{escape(x.mark.label)}</text>")
            tx, ty = lay.pos[x.target]
            ex, ey = _clip(tx, ty, mx, my, *sizes[x.target])
            body.append(f'<line x1="{fmt(mx)}" y1="{fmt(my + MARK / 2)}" x2="{fmt(ex)}" y2="{fmt(ey)}" '
                        f'{_line_attrs(disp)}{_heads(disp)}/>')
        body.append("</g>")

    geometry: dict[int, tuple] = {}

    def center(ep) -> tuple[float, float]:
        if isinstance(ep, NodeRef):
            return lay.pos[ep.node]
        if isinstance(ep, TimelinePos):
            return lay.marks.get((ep.timeline, ep.rank), lay.marks.get(
                (ep.timeline, d.timelines[ep.timeline].end_rank), (MARGIN, MARGIN)))
        return midpoint(ep.edge)

    def endpoints(eid: int) -> tuple:
        if eid not in geometry:
            geometry[eid] = (MARGIN, MARGIN, MARGIN, MARGIN)  # guards self reference
            e = d.edges[eid]
            (sx, sy), (tx, ty) = center(e.src), center(e.dst)
            if isinstance(e.src, NodeRef):
                sx, sy = _clip(sx, sy, tx, ty, *sizes[e.src.node])
            if isinstance(e.dst, NodeRef):
                tx, ty = _clip(tx, ty, sx, sy, *sizes[e.dst.node])
            geometry[eid] = (sx, sy, tx, ty)
        return geometry[eid]

    def midpoint(eid: int) -> tuple[float, float]:
        sx, sy, tx, ty = endpoints(eid)
        return (sx + tx) / 2, (sy + ty) / 2

    for e in d.canonical_edges():
        es = style.edge(e.kind)
        sx, sy, tx, ty = endpoints(e.id)
        if es.route == "angled":
            path = f"M{fmt(sx)},{fmt(sy)} L{fmt(sx)},{fmt(ty)} L{fmt(tx)},{fmt(ty)}"
            lx, ly = sx, ty
        elif es.route == "curved":
            cx, cy = (sx + tx) / 2 + (ty - sy) * 0.25, (sy + ty) / 2 - (tx - sx) * 0.25
            path = f"M{fmt(sx)},{fmt(sy)} Q{fmt(cx)},{fmt(cy)} {fmt(tx)},{fmt(ty)}"
            lx, ly = cx, cy
        else:
            path = f"M{fmt(sx)},{fmt(sy)} L{fmt(tx)},{fmt(ty)}"
            lx, ly = (sx + tx) / 2, (sy + ty) / 2
        body.append(f'<path class="edge {e.kind.value}" d="{path}" {_line_attrs(es)}{_heads(es)}/>')
        label = edge_label(es, e.count)
        if label:
            body.append(f'<text x="{fmt(lx + 4)}" y="{fmt(ly - 4)}" font-size="10">{escape(label)}</text>')

    if not d.nodes and not d.timelines:
        width, height = DEFAULT_CANVAS
    else:
        xs = [p[0] for p in lay.pos.values()] + [m[0] for m in lay.marks.values()]
        ys = [p[1] for p in lay.pos.values()] + [m[1] for m in lay.marks.values()]
        width = max(DEFAULT_CANVAS[0], max(xs) + BOX_W / 2 + 2 * BOX_W + MARGIN)
        height = max(DEFAULT_CANVAS[1], max(ys) + BOX_H + MARGIN + 60)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(width)}" height="{fmt(height)}" '
            f'viewBox="0 0 {fmt(width)} {fmt(height)}" font-family="Helvetica, Arial, sans-serif">')
    return "\n".join([head] + _DEFS + body + ["</svg>"]) + "\n"
