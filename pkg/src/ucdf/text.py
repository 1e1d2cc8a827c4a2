"""The line-oriented ``.ucdf`` text format.

One fact per line::

    ucdf 1
    process A "functionA(arg a)"
    holder stack a "a" content "5"
    timeline t1 on A start
    t1 1 => B
    t1 2@"10:15" => C
    in A: a
    A w> a
    g =>> t1:2
    P %> edge 1
    // remarks are kept with the element that follows them

Parsing assigns ids in declaration order and never runs validation.
Serialization is canonical: nodes by id, timelines (each followed by its
dispatches) by id, containment by parent, then edges by (kind, src, dst).
Tokens are separated by one space; ``:``, ``,`` and ``@`` bind to the token
on their left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core.model import (
    Diagram,
    DiagramError,
    EdgeKind,
    EdgeRef,
    HolderKind,
    NodeKind,
    NodeRef,
    TimelinePos,
)

VERSION = 1

EDGE_OPS = {
    "->": EdgeKind.DATA_FLOW,
    "w>": EdgeKind.DATA_UPDATE,
    "r>": EdgeKind.DATA_READ,
    "+>": EdgeKind.CREATE,
    "x>": EdgeKind.DESTROY,
    "=>": EdgeKind.CONTROL_PAR,
    "=>>": EdgeKind.CONTROL_RETURN,
    "e>": EdgeKind.EXCEPTION,
    "has>": EdgeKind.HAS,
    "is>": EdgeKind.IS,
    "~~": EdgeKind.ALIAS,
    "*>": EdgeKind.REF,
    "#>": EdgeKind.COMMENT_ATTACH,
    "%>": EdgeKind.GATE,
}
OP_OF = {k: op for op, k in EDGE_OPS.items()}

NODE_KEYWORDS = {
    "process": NodeKind.PROCESS,
    "module": NodeKind.MODULE,
    "decision": NodeKind.DECISION,
    "orjoin": NodeKind.ORJOIN,
    "human": NodeKind.HUMAN,
    "note": NodeKind.COMMENT,
    "mark": NodeKind.MARK,
}
KEYWORD_OF = {k: w for w, k in NODE_KEYWORDS.items()}
HOLDER_KEYWORDS = {h.value: h for h in HolderKind}

RESERVED = set(NODE_KEYWORDS) | {"holder", "timeline", "in", "ucdf", "edge"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<badstring>"(?:[^"\\\n]|\\.)*)
  | (?P<op>=>>|=>|->|~~|\+>|\*>|\#>|%>)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[:,@])
    """,
    re.VERBOSE,
)
_WORD_OPS = {"w", "r", "x", "e", "has", "is"}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


class ParseError(Exception):
    def __init__(self, span: SourceSpan, expected: str, found: str) -> None:
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(f"{span.line}:{span.column}: expected {expected}, found {found}")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _lex_line(text: str, lineno: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(SourceSpan(lineno, pos + 1, 1), "a token", repr(text[pos]))
        kind = m.lastgroup
        word = m.group()
        end = m.end()
        if kind == "badstring":
            raise ParseError(SourceSpan(lineno, pos + 1, len(word)), "closing quote", "end of line")
        if kind == "ident" and word in _WORD_OPS and text.startswith(">", end):
            kind, word, end = "op", word + ">", end + 1
        if kind != "ws":
            toks.append(_Tok(kind, word, SourceSpan(lineno, pos + 1, len(word))))
        pos = end
    return toks


def _unquote(s: str) -> str:
    out = []
    i = 1
    while i < len(s) - 1:
        ch = s[i]
        if ch == "\\":
            nxt = s[i + 1]
            out.append({"n": "\n", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


class _LineParser:
    def __init__(self, toks: list[_Tok], lineno: int, line_len: int) -> None:
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.line_len = line_len

    def peek(self, k: int = 0) -> Optional[_Tok]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def _eol_span(self) -> SourceSpan:
        return SourceSpan(self.lineno, self.line_len + 1, 0)

    def fail(self, expected: str) -> ParseError:
        t = self.peek()
        if t is None:
            return ParseError(self._eol_span(), expected, "end of line")
        return ParseError(t.span, expected, repr(t.text))

    def take(self, kind: str, expected: str, text: Optional[str] = None) -> _Tok:
        t = self.peek()
        if t is None or t.kind != kind or (text is not None and t.text != text):
            raise self.fail(expected)
        self.i += 1
        return t

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Tok]:
        t = self.peek()
        if t is not None and t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def ident(self, expected: str = "identifier") -> _Tok:
        t = self.take("ident", expected)
        if t.text in RESERVED:
            raise ParseError(t.span, expected, repr(t.text))
        return t

    def end(self) -> None:
        if self.peek() is not None:
            raise self.fail("end of line")


def parse(text: str) -> Diagram:
    """Parse ``.ucdf`` text into a diagram.  Raises :class:`ParseError`."""
    d = Diagram()
    pending: list[str] = []
    seen_header = False
    seen_element = False
    gate_fixups: list[tuple[int, int, _Tok]] = []
    edge_count = 0

    def attach(key: tuple) -> None:
        if pending:
            d.remarks.setdefault(key, []).extend(pending)
            pending.clear()

    def node_id(tok: _Tok) -> int:
        hit = d.lookup(tok.text)
        if hit is None or hit[0] != "node":
            raise ParseError(tok.span, "a declared node", repr(tok.text))
        return hit[1]

    def timeline_id(tok: _Tok) -> int:
        hit = d.lookup(tok.text)
        if hit is None or hit[0] != "timeline":
            raise ParseError(tok.span, "a declared timeline", repr(tok.text))
        return hit[1]

    def declare(tok: _Tok) -> str:
        if d.lookup(tok.text) is not None:
            raise ParseError(tok.span, "a fresh identifier", f"duplicate {tok.text!r}")
        return tok.text

    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("//"):
            pending.append(stripped[2:].strip())
            continue
        toks = _lex_line(raw, lineno)
        p = _LineParser(toks, lineno, len(raw))
        first = toks[0]

        if first.kind == "ident" and first.text == "ucdf":
            if seen_header or seen_element:
                raise ParseError(first.span, "a diagram element", "second header")
            p.i = 1
            v = p.take("int", "format version")
            if int(v.text) != VERSION:
                raise ParseError(v.span, f"version {VERSION}", v.text)
            p.end()
            seen_header = True
            attach(("head",))
            continue
        seen_element = True

        if first.kind == "ident" and (first.text in NODE_KEYWORDS or first.text == "holder"):
            p.i = 1
            holder = None
            if first.text == "holder":
                hk = p.take("ident", "holder kind")
                if hk.text not in HOLDER_KEYWORDS:
                    raise ParseError(hk.span, "holder kind", repr(hk.text))
                holder = HOLDER_KEYWORDS[hk.text]
                kind = NodeKind.HOLDER
            else:
                kind = NODE_KEYWORDS[first.text]
            name_tok = p.ident("node identifier")
            ident = declare(name_tok)
            name = content = ""
            s = p.accept("string")
            if s:
                name = _unquote(s.text)
            if p.accept("ident", "content"):
                content = _unquote(p.take("string", "content string").text)
            asproc = p.accept("ident", "asprocess")
            p.end()
            try:
                nid = d.add_node(kind, name, content, holder=holder,
                                 as_process=asproc is not None, ident=ident)
            except DiagramError as exc:
                raise ParseError((asproc or first).span, "a valid node", str(exc)) from None
            attach(("node", nid))

        elif first.kind == "ident" and first.text == "timeline":
            p.i = 1
            ident = declare(p.ident("timeline identifier"))
            owner = None
            root_label = ""
            if p.accept("ident", "on"):
                owner = node_id(p.ident("owner identifier"))
            elif p.accept("ident", "root"):
                s = p.accept("string")
                root_label = _unquote(s.text) if s else ""
            else:
                raise p.fail("'on' or 'root'")
            markers = []
            while p.peek() is not None:
                m = p.take("ident", "start, stop or done")
                if m.text not in ("start", "stop", "done") or m.text in markers:
                    raise ParseError(m.span, "start, stop or done", repr(m.text))
                markers.append(m.text)
            tid = d.add_timeline(owner, markers, root_label=root_label, ident=ident,
                                 check_owner=False)
            attach(("timeline", tid))

        elif first.kind == "ident" and first.text == "in":
            p.i = 1
            parent = node_id(p.ident("container identifier"))
            p.take("punct", "':'", ":")
            children = [p.ident("part identifier")]
            while p.accept("punct", ","):
                children.append(p.ident("part identifier"))
            p.end()
            for c in children:
                try:
                    d.set_container(node_id(c), parent)
                except DiagramError as exc:
                    raise ParseError(c.span, "a single Euler parent", str(exc)) from None
            attach(("in", parent))

        elif first.kind == "ident" and len(toks) > 1 and toks[1].kind == "int":
            # dispatch: TIMELINE RANK[@"label"] => TARGET
            tid = timeline_id(p.ident("timeline identifier"))
            rank_tok = p.take("int", "order mark rank")
            label = None
            if p.accept("punct", "@"):
                label = _unquote(p.take("string", "mark label").text)
            p.take("op", "'=>'", "=>")
            target = node_id(p.ident("dispatch target"))
            p.end()
            try:
                d.append_dispatch(tid, int(rank_tok.text), target, label)
            except DiagramError as exc:
                raise ParseError(rank_tok.span, "an increasing rank", str(exc)) from None
            attach(("dispatch", tid, int(rank_tok.text)))

        elif first.kind == "ident":
            src = NodeRef(node_id(p.ident("edge source")))
            op = p.take("op", "edge operator")
            kind = EDGE_OPS[op.text]
            dst_tok = p.take("ident", "edge destination")
            forward = None
            if dst_tok.text == "edge":
                n = p.take("int", "edge number")
                dst = EdgeRef(int(n.text))
                forward = n
            elif p.accept("punct", ":"):
                r = p.take("int", "timeline rank")
                dst = TimelinePos(timeline_id(dst_tok), int(r.text))
            else:
                if dst_tok.text in RESERVED:
                    raise ParseError(dst_tok.span, "edge destination", repr(dst_tok.text))
                dst = NodeRef(node_id(dst_tok))
            count = 1
            if kind is EdgeKind.ALIAS and p.accept("ident", "x"):
                c = p.take("int", "alias count")
                count = int(c.text)
            if kind is EdgeKind.CONTROL_PAR:
                p.accept("ident", "par")
            p.end()
            eid = d.add_edge(kind, src, dst, count, _allow_forward_edge_ref=True)
            edge_count += 1
            if forward is not None:
                gate_fixups.append((eid, int(forward.text), forward))
            attach(("edge", eid))
        else:
            raise p.fail("a node, timeline, containment, dispatch or edge")

    # 'edge N' names the N-th edge line of the file
    for eid, n, tok in gate_fixups:
        if not 1 <= n <= edge_count:
            raise ParseError(tok.span, f"an edge number in 1..{edge_count}", tok.text)
        d.edges[eid].dst = EdgeRef(n)
    if pending:
        d.remarks.setdefault(("end",), []).extend(pending)
    return d


def _node_line(d: Diagram, n) -> str:
    kw = f"holder {n.holder.value}" if n.holder is not None else KEYWORD_OF[n.kind]
    parts = [kw, n.ident]
    if n.name:
        parts.append(quote(n.name))
    if n.content:
        parts += ["content", quote(n.content)]
    if n.as_process:
        parts.append("asprocess")
    return " ".join(parts)


def serialize(d: Diagram) -> str:
    lines: list[str] = []
    edges = d.canonical_edges()
    index = {e.id: i for i, e in enumerate(edges, start=1)}

    def remark(key: tuple) -> None:
        for r in d.remarks.get(key, ()):
            lines.append(f"// {r}" if r else "//")

    def ep(e) -> str:
        if isinstance(e, NodeRef):
            return d.nodes[e.node].ident
        if isinstance(e, TimelinePos):
            return f"{d.timelines[e.timeline].ident}:{e.rank}"
        return f"edge {index[e.edge]}"

    remark(("head",))
    lines.append(f"ucdf {VERSION}")
    for n in sorted(d.nodes.values(), key=lambda n: n.id):
        remark(("node", n.id))
        lines.append(_node_line(d, n))
    for t in sorted(d.timelines.values(), key=lambda t: t.id):
        remark(("timeline", t.id))
        parts = ["timeline", t.ident]
        if t.owner is None:
            parts.append("root")
            if t.root_label:
                parts.append(quote(t.root_label))
        else:
            parts += ["on", d.nodes[t.owner].ident]
        parts += [m for m in ("start", "stop", "done") if m in t.markers]
        lines.append(" ".join(parts))
        for x in t.dispatches:
            remark(("dispatch", t.id, x.mark.rank))
            mark = str(x.mark.rank)
            if x.mark.label != mark:
                mark += "@" + quote(x.mark.label)
            lines.append(f"{t.ident} {mark} => {d.nodes[x.target].ident}")
    by_parent: dict[int, list[int]] = {}
    for child, parent in d.euler.items():
        by_parent.setdefault(parent, []).append(child)
    for parent in sorted(by_parent):
        remark(("in", parent))
        kids = ", ".join(d.nodes[c].ident for c in sorted(by_parent[parent]))
        lines.append(f"in {d.nodes[parent].ident}: {kids}")
    for e in edges:
        remark(("edge", e.id))
        line = f"{ep(e.src)} {OP_OF[e.kind]} {ep(e.dst)}"
        if e.kind is EdgeKind.ALIAS and e.count != 1:
            line += f" x {e.count}"
        lines.append(line)
    remark(("end",))
    return "\n".join(lines) + "\n"


def canonicalize(text: str) -> str:
    return serialize(parse(text))
