from __future__ import annotations

import random
import re
import xml.etree.ElementTree as ET

import pydot
import pytest

from conftest import GOLDEN, NOTATION, load_program
from ucdf.core import EdgeKind, HolderKind, NodeKind
from ucdf.extract import extract
from ucdf.generate import random_diagram
from ucdf.render import DEFAULT_STYLE, RenderRefused, StyleError, emit_dot, emit_svg, load_style, parse_style
from ucdf.render.style import BORDERS, DECORS, HEADS, LINES, ROUTES
from ucdf.render.svg import CELL, DEFAULT_CANVAS, MARGIN, MARK
from ucdf.text import canonicalize, parse

SVG = "{http://www.w3.org/2000/svg}"


class TestStyle:
    def test_every_node_kind_is_styled(self):
        for k in NodeKind:
            if k is not NodeKind.HOLDER:
                assert k.value in DEFAULT_STYLE.nodes
        for h in HolderKind:
            assert f"holder:{h.value}" in DEFAULT_STYLE.nodes

    def test_every_edge_kind_is_styled(self):
        for k in EdgeKind:
            assert DEFAULT_STYLE.edge(k) is not None
        assert {"dispatch", "timeline"} <= set(DEFAULT_STYLE.edges)

    def test_default_values_are_in_vocabulary(self):
        for s in DEFAULT_STYLE.nodes.values():
            assert s.border in BORDERS and s.decor in DECORS
        for s in DEFAULT_STYLE.edges.values():
            assert s.line in LINES and s.head in HEADS and s.route in ROUTES

    def test_canonical_glyphs(self):
        assert DEFAULT_STYLE.nodes["decision"].shape == "diamond"
        assert DEFAULT_STYLE.nodes["holder:stack"].border == "dashed"
        assert DEFAULT_STYLE.edge(EdgeKind.ALIAS).line == "dashdot"
        assert DEFAULT_STYLE.edge(EdgeKind.CONTROL_RETURN).head == "both"
        assert DEFAULT_STYLE.edge(EdgeKind.CREATE).label == "+"

    def test_override(self):
        s = parse_style("# mine\nnode.process.fill = #eeeeee\nholder.heap.border = bold\n"
                        "edge.alias.line = dotted\n")
        assert s.nodes["process"].fill == "#eeeeee"
        assert s.nodes["holder:heap"].border == "bold"
        assert s.edge(EdgeKind.ALIAS).line == "dotted"
        assert DEFAULT_STYLE.edge(EdgeKind.ALIAS).line == "dashdot"

    @pytest.mark.parametrize("text", [
        "node.process.fill",
        "node.process = box",
        "node.blob.shape = box",
        "node.process.shape = hexagon",
        "edge.read.line = zigzag",
        "edge.read.colour = red",
        "graph.x.y = z",
    ])
    def test_bad_override(self, text):
        with pytest.raises(StyleError):
            parse_style(text)

    def test_load_style_from_environment(self, tmp_path):
        f = tmp_path / "style.txt"
        f.write_text("edge.has.route = straight\n", encoding="utf-8")
        assert load_style({"UCDF_STYLE": str(f)}).edge(EdgeKind.HAS).route == "straight"
        assert load_style({}) is DEFAULT_STYLE
        with pytest.raises(StyleError):
            load_style({"UCDF_STYLE": str(tmp_path / "missing")})


class TestDot:
    def test_empty(self):
        lines = emit_dot(parse("")).splitlines()
        assert lines[0] == "digraph ucdf {" and lines[-1] == "}"
        assert len(lines) == 5

    def test_parallel_pair(self):
        out = emit_dot(parse("process A\nprocess B\nA => B\n"))
        assert len(re.findall(r'shape="box"', out)) == 2
        (edge,) = [line for line in out.splitlines() if "->" in line]
        assert '"A" -> "B"' in edge and 'style="bold"' in edge

    def test_function_call_golden(self):
        p, t = load_program("function_call")
        d = extract(p, t).diagram
        assert emit_dot(d) == (GOLDEN / "function_call.dot").read_text(encoding="utf-8")

    def test_refuses_invalid_diagram(self):
        bad = parse("process A\nholder static h\nprocess B\nh => B\n", )
        with pytest.raises(RenderRefused) as info:
            emit_dot(bad)
        assert info.value.violations
        assert emit_dot(bad, force=True).startswith("digraph")

    def test_euler_clusters(self):
        out = emit_dot(parse("process P\nholder static a\nin P: a\n"))
        assert 'subgraph "cluster_P"' in out

    def test_style_override_changes_output(self):
        d = parse("process A\n")
        out = emit_dot(d, parse_style("node.process.shape = ellipse\n"))
        assert 'shape="ellipse"' in out


class TestSvg:
    def test_empty_canvas(self):
        root = ET.fromstring(emit_svg(parse("")))
        assert (root.get("width"), root.get("height")) == tuple(str(v) for v in DEFAULT_CANVAS)

    def test_marks_follow_rank(self):
        d = parse("process A\nprocess B\nprocess C\nprocess D\n"
                  "timeline t on A\nt 1 => B\nt 2 => C\nt 3 => D\n")
        root = ET.fromstring(emit_svg(d))
        xs = [float(r.get("x")) for r in root.iter(f"{SVG}rect") if r.get("class") == "mark"]
        assert xs == [MARGIN + rank * CELL - MARK / 2 for rank in (1, 2, 3)]

    def test_alias_is_dot_dash(self):
        out = emit_svg(parse("process a\nprocess b\nb ~~ a\n"))
        (edge,) = [line for line in out.splitlines() if 'class="edge alias"' in line]
        assert 'stroke-dasharray="8,3,2,3"' in edge

    def test_refuses_invalid_diagram(self):
        with pytest.raises(RenderRefused):
            emit_svg(parse("process A\nholder static h\nprocess B\nh => B\n"))


@pytest.mark.parametrize("path", NOTATION, ids=lambda p: p.stem)
def test_fixture_renders_to_both_formats(path):
    text = path.read_text(encoding="utf-8")
    d = parse(text)
    dot = emit_dot(d)
    assert pydot.graph_from_dot_data(dot)
    ET.fromstring(emit_svg(d))
    assert emit_dot(parse(canonicalize(text))) == dot
    assert emit_dot(d) == dot and emit_svg(d) == emit_svg(d)


def test_random_diagrams_render():
    for seed in range(60):
        d = random_diagram(random.Random(seed))
        dot = emit_dot(d, force=True)
        assert pydot.graph_from_dot_data(dot), seed
        ET.fromstring(emit_svg(d, force=True))
