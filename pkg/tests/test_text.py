from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NOTATION
from ucdf.core import EdgeKind, EdgeRef, HolderKind, NodeKind, TimelinePos, new_diagram, structurally_equal
from ucdf.generate import random_diagram
from ucdf.text import ParseError, canonicalize, parse, quote, serialize

SAMPLE = """ucdf 1
process A "functionA(arg a)"
holder stack a "a" content "5"
process B
timeline t1 on A start
t1 1 => B
t1 2@"10:15" => B
in A: a
A w> a
B =>> t1:2
A %> edge 1
"""


class TestParse:
    def test_sample(self):
        d = parse(SAMPLE)
        a = d.node_by_ident("A")
        assert a.name == "functionA(arg a)"
        h = d.node_by_ident("a")
        assert h.holder is HolderKind.STACK and h.content == "5"
        t = d.timeline_by_ident("t1")
        assert t.markers == frozenset({"start"})
        assert [x.mark.label for x in t.dispatches] == ["1", "10:15"]
        assert d.euler == {h.id: a.id}
        kinds = sorted(e.kind.value for e in d.edges.values())
        assert kinds == ["gate", "return", "update"]
        ret = next(e for e in d.edges.values() if e.kind is EdgeKind.CONTROL_RETURN)
        assert ret.dst == TimelinePos(t.id, 2)
        gate = next(e for e in d.edges.values() if e.kind is EdgeKind.GATE)
        assert isinstance(gate.dst, EdgeRef)
        assert d.edges[gate.dst.edge].kind is EdgeKind.DATA_UPDATE

    def test_header_is_optional(self):
        d = parse("process A\n")
        assert d.node_by_ident("A").kind is NodeKind.PROCESS

    def test_root_timeline(self):
        d = parse('process W\ntimeline T root "thread 1"\nT 1 => W\n')
        t = d.timeline_by_ident("T")
        assert t.owner is None and t.root_label == "thread 1"

    def test_alias_count(self):
        d = parse("process a\nprocess b\nb ~~ a x 3\n")
        (e,) = d.edges.values()
        assert e.kind is EdgeKind.ALIAS and e.count == 3

    def test_remarks_survive(self):
        text = "// top\nucdf 1\n// about A\nprocess A\n// tail\n"
        assert serialize(parse(text)) == text

    @pytest.mark.parametrize("text, needle", [
        ("process A\nA w> B\n", "B"),
        ("process A\nprocess A\n", "A"),
        ("ucdf 2\n", "2"),
        ("process\n", "identifier"),
        ('process A "unterminated\n', ""),
        ("holder weird x\n", "weird"),
        ("process A\ntimeline t on A\nt 1 => A\nt 1 => A\n", "1"),
        ("process A\nA ?? A\n", "2:3"),
    ])
    def test_errors_carry_position(self, text, needle):
        with pytest.raises(ParseError) as info:
            parse(text)
        assert info.value.span.line >= 1
        assert needle in str(info.value)

    def test_quote_escapes(self):
        assert quote('a"b\\c\nd') == '"a\\"b\\\\c\\nd"'
        d = new_diagram()
        d.add_node(NodeKind.PROCESS, 'x "y" \\ z\nw')
        assert structurally_equal(parse(serialize(d)), d)


class TestSerialize:
    def test_canonical_order(self):
        messy = "process B\nholder static x\nx r> B\nB w> x\n"
        assert canonicalize(messy).splitlines()[-2:] == ["B w> x", "x r> B"]

    def test_empty(self):
        assert serialize(new_diagram()) == "ucdf 1\n"

    def test_lf_only(self):
        d = parse(SAMPLE.replace("\n", "\r\n"))
        assert "\r" not in serialize(d)

    @pytest.mark.parametrize("path", NOTATION, ids=lambda p: p.stem)
    def test_fixtures_are_canonical(self, path):
        text = path.read_text(encoding="utf-8")
        assert canonicalize(text) == text


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_random_diagrams(seed):
    d = random_diagram(random.Random(seed))
    text = serialize(d)
    back = parse(text)
    assert structurally_equal(back, d)
    assert serialize(back) == text


@settings(max_examples=100, deadline=None)
@given(st.text(min_size=0, max_size=30))
def test_round_trip_arbitrary_names(name):
    d = new_diagram()
    d.add_node(NodeKind.PROCESS, name, name)
    assert structurally_equal(parse(serialize(d)), d)
