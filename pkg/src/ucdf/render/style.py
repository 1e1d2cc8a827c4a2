"""The canonical style table and its line-oriented override format.

An override file holds ``key = value`` lines; lines starting with ``#`` are comments.
Keys are ``node.<kind>.<prop>``, ``holder.<kind>.<prop>`` or
``edge.<kind>.<prop>``, where edge kinds include the two timeline pseudo
kinds ``dispatch`` (mark to target) and ``timeline`` (the chain itself).
Node props: shape, border, fill, decor.  Edge props: line, head, label,
route.  See the README for the value vocabularies.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from ..core import EdgeKind, HolderKind, NodeKind

BORDERS = ("solid", "dashed", "dotted", "bold", "double", "none")
DECORS = ("none", "double-sides", "or-label", "menu", "star", "wavy", "underline", "small",
          "folder", "bold-double")
LINES = ("solid", "dashed", "dotted", "bold", "bold-dashed", "dashdot", "thin")
HEADS = ("normal", "open", "both", "none", "dot")
ROUTES = ("straight", "angled", "curved", "midpoint")


class StyleError(ValueError):
    pass


@dataclass(frozen=True)
class NodeStyle:
    shape: str  # box | ellipse | diamond | note | plaintext | folder
    border: str = "solid"
    fill: str = "white"
    decor: str = "none"


@dataclass(frozen=True)
class EdgeStyle:
    line: str
    head: str = "normal"
    label: str = ""  # literal text, "count" for the alias count, "" for none
    route: str = "straight"


def _default_nodes() -> dict[str, NodeStyle]:
    return {
        "process": NodeStyle("box"),
        "module": NodeStyle("box", decor="double-sides"),
        "decision": NodeStyle("diamond"),
        "orjoin": NodeStyle("box", decor="or-label"),
        "human": NodeStyle("box", decor="menu"),
        "note": NodeStyle("note", border="dashed", fill="#fffbe6"),
        "mark": NodeStyle("plaintext", border="none", decor="star"),
        "holder:static": NodeStyle("ellipse"),
        "holder:stack": NodeStyle("ellipse", border="dashed"),
        "holder:heap": NodeStyle("ellipse", border="dotted"),
        "holder:register": NodeStyle("ellipse", border="double"),
        "holder:file": NodeStyle("folder", decor="folder"),
        "holder:document": NodeStyle("box", decor="wavy"),
        "holder:collection": NodeStyle("ellipse", border="double", decor="bold-double"),
        "holder:address": NodeStyle("ellipse", decor="small"),
        "holder:const": NodeStyle("ellipse", decor="underline"),
    }


def _default_edges() -> dict[str, EdgeStyle]:
    data = EdgeStyle("thin", "open")
    return {
        "dispatch": EdgeStyle("bold", "normal"),
        "timeline": EdgeStyle("bold", "none"),
        "update": data,
        "read": data,
        "flow": data,
        "create": EdgeStyle("thin", "open", "+"),
        "destroy": EdgeStyle("thin", "open", "×"),
        "par": EdgeStyle("bold", "normal"),
        "return": EdgeStyle("bold", "both"),
        "exception": EdgeStyle("bold-dashed", "normal"),
        "has": EdgeStyle("solid", "none", "", "angled"),
        "is": EdgeStyle("solid", "none", "is", "angled"),
        "alias": EdgeStyle("dashdot", "none", "count"),
        "ref": EdgeStyle("dotted", "normal", "", "curved"),
        "comment": EdgeStyle("solid", "dot", "", "angled"),
        "gate": EdgeStyle("thin", "normal", "", "midpoint"),
    }


@dataclass(frozen=True)
class StyleTable:
    nodes: dict = field(default_factory=_default_nodes)
    edges: dict = field(default_factory=_default_edges)

    def node(self, n) -> NodeStyle:
        key = f"holder:{n.holder.value}" if n.holder is not None else n.kind.value
        return self.nodes[key]

    def edge(self, kind) -> EdgeStyle:
        return self.edges[kind if isinstance(kind, str) else kind.value]


def node_keys() -> list[str]:
    return [k.value for k in NodeKind if k is not NodeKind.HOLDER] + [
        f"holder:{h.value}" for h in HolderKind]


def edge_keys() -> list[str]:
    return ["dispatch", "timeline"] + [k.value for k in EdgeKind]


DEFAULT_STYLE = StyleTable()

_NODE_PROPS = {"shape": None, "border": BORDERS, "fill": None, "decor": DECORS}
_EDGE_PROPS = {"line": LINES, "head": HEADS, "label": None, "route": ROUTES}
_SHAPES = ("box", "ellipse", "diamond", "note", "plaintext", "folder")


def parse_style(text: str, base: StyleTable = DEFAULT_STYLE) -> StyleTable:
    nodes = dict(base.nodes)
    edges = dict(base.edges)
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise StyleError(f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        parts = key.split(".")
        if len(parts) != 3:
            raise StyleError(f"line {n}: malformed key {key!r}")
        group, kind, prop = parts
        if group == "holder":
            group, kind = "node", f"holder:{kind}"
        if group == "node":
            if kind not in nodes or prop not in _NODE_PROPS:
                raise StyleError(f"line {n}: unknown style key {key!r}")
            allowed = _SHAPES if prop == "shape" else _NODE_PROPS[prop]
            if allowed is not None and value not in allowed:
                raise StyleError(f"line {n}: {prop} must be one of {', '.join(allowed)}")
            nodes[kind] = replace(nodes[kind], **{prop: value})
        elif group == "edge":
            if kind not in edges or prop not in _EDGE_PROPS:
                raise StyleError(f"line {n}: unknown style key {key!r}")
            allowed = _EDGE_PROPS[prop]
            if allowed is not None and value not in allowed:
                raise StyleError(f"line {n}: {prop} must be one of {', '.join(allowed)}")
            edges[kind] = replace(edges[kind], **{prop: value})
        else:
            raise StyleError(f"line {n}: unknown style group {group!r}")
    return StyleTable(nodes, edges)


def load_style(environ=None) -> StyleTable:
    """The default table, with overrides from the file named by UCDF_STYLE if set."""
    env = os.environ if environ is None else environ
    path = env.get("UCDF_STYLE")
    if not path:
        return DEFAULT_STYLE
    try:
        with open(path, encoding="utf-8") as f:
            return parse_style(f.read())
    except OSError as e:
        raise StyleError(f"cannot read UCDF_STYLE file: {e}") from None
