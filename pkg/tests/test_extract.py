from __future__ import annotations

import itertools

import pytest

from conftest import GOLDEN, PROGRAMS, compile_source, load_program
from ucdf.core import EdgeKind, HolderKind, NodeKind, NodeRef, TimelinePos, control_subtree, validate
from ucdf.extract import (
    CALL_STYLES,
    GRANULARITIES,
    GROUPINGS,
    ExtractError,
    ExtractOptions,
    extract,
    extract_compact,
    function_node,
    is_straight_line,
)
from ucdf.text import serialize

ALL_OPTIONS = [ExtractOptions(g, c, gr, al) for g, c, gr, al in
               itertools.product(GRANULARITIES, CALL_STYLES, GROUPINGS, (None, 2))]


def diagram_of(name, **kw):
    p, t = load_program(name)
    return extract(p, t, ExtractOptions(**kw)).diagram, t


def fn(d, table, name):
    return function_node(d, table, name)


def edges(d, kind):
    return [e for e in d.edges.values() if e.kind is kind]


class TestOptions:
    def test_defaults(self):
        o = ExtractOptions()
        assert (o.granularity, o.call_style, o.grouping, o.alias_threshold) == (
            "operator", "simplified", "has_edges", None)

    @pytest.mark.parametrize("kw", [
        {"granularity": "line"}, {"call_style": "short"}, {"grouping": "venn"},
        {"alias_threshold": 1},
    ])
    def test_invalid(self, kw):
        with pytest.raises(ExtractError):
            ExtractOptions(**kw)

    def test_unknown_entry(self):
        p, t = load_program("goto")
        with pytest.raises(ExtractError):
            extract(p, t, ExtractOptions(entry="nope"))


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
@pytest.mark.parametrize("options", ALL_OPTIONS, ids=lambda o: f"{o.granularity}-{o.call_style}-{o.grouping}-{o.alias_threshold}")
def test_every_extraction_validates(path, options):
    p, t = load_program(path)
    assert validate(extract(p, t, options).diagram) == []


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_matches_golden(path):
    p, t = load_program(path)
    golden = (GOLDEN / f"{path.stem}.ucdf").read_text(encoding="utf-8")
    assert serialize(extract(p, t).diagram) == golden


@pytest.mark.parametrize("name, kw, golden", [
    ("function_call", {"call_style": "full"}, "function_call.full.ucdf"),
    ("alias_sites", {"alias_threshold": 2}, "alias_sites.alias.ucdf"),
])
def test_matches_variant_golden(name, kw, golden):
    d, _ = diagram_of(name, **kw)
    assert serialize(d) == (GOLDEN / golden).read_text(encoding="utf-8")


def test_extraction_is_deterministic():
    for path in PROGRAMS:
        p, t = load_program(path)
        p2, t2 = load_program(path)
        assert serialize(extract(p, t).diagram) == serialize(extract(p2, t2).diagram)


class TestWorkedExampleFacts:
    def test_function_call_has_two_holders_named_a(self):
        d, t = diagram_of("function_call")
        a = [n for n in d.nodes.values() if n.is_holder and n.name == "a"]
        assert len(a) == 2
        flows = [(e.src.node, e.dst.node) for e in edges(d, EdgeKind.DATA_FLOW)]
        ids = {n.id for n in a}
        assert any(s in ids and r in ids and s != r for s, r in flows)

    def test_function_call_simplified_shape(self):
        d, t = diagram_of("function_call")
        func_a = fn(d, t, "functionA")
        block = fn(d, t, "{block1}")
        disp = [(tl.owner, x.target) for tl in d.timelines.values() for x in tl.dispatches]
        assert (block, func_a) in disp
        b = next(n for n in d.nodes.values() if n.name == "b")
        stmt = next(n for n in d.nodes.values() if n.name == "arg b(a)")
        param = next(n for n in d.nodes.values() if n.name == "a" and
                     n.attrs["key"].startswith("sym:") and
                     (func_a, n.id) in {(e.src.node, e.dst.node) for e in edges(d, EdgeKind.HAS)})
        assert (EdgeKind.DATA_UPDATE, stmt.id, b.id) in {(e.kind, e.src.node, e.dst.node) for e in d.edges.values()}
        assert (EdgeKind.DATA_READ, param.id, stmt.id) in {(e.kind, e.src.node, e.dst.node) for e in d.edges.values()}

    def test_full_style_has_copy_step(self):
        d, _ = diagram_of("function_call", call_style="full")
        copies = [n for n in d.nodes.values() if n.attrs.get("key", "").startswith("copy:")]
        assert len(copies) == 1
        me = NodeRef(copies[0].id)
        kinds = sorted(e.kind.value for e in d.edges.values() if me in (e.src, e.dst))
        assert kinds == ["read", "update"]

    def test_member_function_receives_record(self):
        d, t = diagram_of("member_function")
        this = next(n for n in d.nodes.values() if n.name == "this_")
        rec = next(n for n in d.nodes.values() if n.name == "record arg")
        assert (this.id, rec.id) in {(e.src.node, e.dst.node) for e in edges(d, EdgeKind.IS)}

    def test_ret_holder_is_written_only_inside_callee(self):
        d, t = diagram_of("return_value")
        callee = fn(d, t, "functionA")
        inside = control_subtree(d, callee) | {callee}
        ret = next(n for n in d.nodes.values() if n.attrs.get("key", "").startswith("ret:"))
        incoming = [e for e in d.edges.values() if e.dst == NodeRef(ret.id) and
                    e.kind in (EdgeKind.DATA_UPDATE, EdgeKind.DATA_FLOW, EdgeKind.CREATE)]
        assert incoming
        assert all(e.src.node in inside for e in incoming)

    def test_callback_uses_constant_address(self):
        d, t = diagram_of("callback")
        const = next(n for n in d.nodes.values() if n.holder is HolderKind.CONSTANT and n.name == "func")
        fp = next(n for n in d.nodes.values() if n.name == "fp")
        assert fp.holder is HolderKind.ADDRESS
        assert (fp.id, const.id) in {(e.src.node, e.dst.node) for e in edges(d, EdgeKind.REF)}
        block = fn(d, t, "{block1}")
        targets = [x.target for tl in d.timelines.values() if tl.owner == block for x in tl.dispatches]
        assert fn(d, t, "func") in targets

    def test_nested_call_order(self):
        d, t = diagram_of("nested_calls")
        main = fn(d, t, "main")
        (tl,) = [x for x in d.timelines.values() if x.owner == main]
        rank = {x.target: x.rank for x in tl.dispatches}
        assert rank[fn(d, t, "f1")] < rank[fn(d, t, "f2")]

    def test_goto_returns_to_label(self):
        d, t = diagram_of("goto")
        main = fn(d, t, "main")
        (tl,) = [x for x in d.timelines.values() if x.owner == main]
        label = next(n for n in d.nodes.values() if n.name == "again:")
        goto = next(n for n in d.nodes.values() if n.name == "goto again")
        (ret,) = [e for e in edges(d, EdgeKind.CONTROL_RETURN) if e.src == NodeRef(goto.id)]
        assert ret.dst == TimelinePos(tl.id, next(x.rank for x in tl.dispatches if x.target == label.id))

    def test_break_and_continue_return(self):
        d, _ = diagram_of("goto")
        names = {d.nodes[e.src.node].name for e in edges(d, EdgeKind.CONTROL_RETURN)}
        assert names == {"goto again", "break", "continue"}

    def test_try_catch_exception_edge(self):
        d, _ = diagram_of("try_catch")
        (e,) = edges(d, EdgeKind.EXCEPTION)
        assert d.nodes[e.src.node].name == "try"
        assert d.nodes[e.dst.node].name.startswith("catch")

    def test_spawn_has_two_root_timelines(self):
        d, t = diagram_of("spawn_threads")
        roots = [x for x in d.timelines.values() if x.owner is None]
        assert len(roots) == 2
        worker = fn(d, t, "worker")
        assert all([x.target for x in r.dispatches] == [worker] for r in roots)
        assert len(edges(d, EdgeKind.CONTROL_PAR)) == 2

    def test_storage_holder_kinds(self):
        d, _ = diagram_of("storage")
        kinds = {n.name: n.holder for n in d.nodes.values() if n.is_holder}
        assert kinds["g"] is HolderKind.STATIC
        assert kinds["q"] is HolderKind.HEAP
        assert kinds["c"] is HolderKind.COLLECTION
        assert kinds["p"] is HolderKind.ADDRESS
        assert len(edges(d, EdgeKind.CREATE)) == 1
        assert len(edges(d, EdgeKind.DESTROY)) == 1


class TestGranularity:
    def test_block_level_drops_statements(self):
        op, _ = diagram_of("goto")
        blk, _ = diagram_of("goto", granularity="block")
        fun, _ = diagram_of("goto", granularity="function")
        assert len(fun.nodes) < len(blk.nodes) < len(op.nodes)
        assert not any(n.kind is NodeKind.DECISION for n in fun.nodes.values())

    def test_function_level_keeps_calls(self):
        d, t = diagram_of("nested_calls", granularity="function")
        main = fn(d, t, "main")
        (tl,) = [x for x in d.timelines.values() if x.owner == main]
        assert [x.target for x in tl.dispatches] == [fn(d, t, "f1"), fn(d, t, "f2")]


class TestGroupingAndAlias:
    def test_euler_replaces_has(self):
        has, _ = diagram_of("storage")
        eul, _ = diagram_of("storage", grouping="euler")
        assert edges(has, EdgeKind.HAS) and not has.euler
        assert not edges(eul, EdgeKind.HAS)
        assert len(eul.euler) == len(edges(has, EdgeKind.HAS))

    def test_alias_copies(self):
        d, t = diagram_of("alias_sites", alias_threshold=2)
        log = fn(d, t, "log")
        aliases = edges(d, EdgeKind.ALIAS)
        assert len(aliases) == 2
        assert all(e.dst == NodeRef(log) for e in aliases)

    def test_alias_threshold_not_reached(self):
        d, _ = diagram_of("alias_sites", alias_threshold=4)
        assert not edges(d, EdgeKind.ALIAS)


class TestComments:
    def test_comment_attaches_to_next_declaration(self):
        d, t = diagram_of("callback")
        block = fn(d, t, "{block1}")
        notes = {d.nodes[e.src.node].content: e.dst.node for e in edges(d, EdgeKind.COMMENT_ATTACH)}
        assert notes["calling block"] == block

    def test_trailing_comment(self):
        p, t = compile_source("void main()\n{\n    int x = 1; // counter\n}\n")
        d = extract(p, t).diagram
        (e,) = edges(d, EdgeKind.COMMENT_ATTACH)
        assert d.nodes[e.dst.node].name == "x"


class TestIndirect:
    def test_unresolved_indirect_call_is_reported(self):
        p, t = compile_source("""void a(int x) { }
void b(int x) { }
void main() {
    fn(int) fp;
    fp = a;
    fp = b;
    (*fp)(1);
}""")
        report = extract(p, t)
        assert len(report.unresolved_indirect_calls) == 1
        unres = [n for n in report.diagram.nodes.values() if n.attrs.get("key", "").startswith("unres:")]
        assert len(unres) == 1
        assert validate(report.diagram) == []


def test_compact_view():
    p, t = load_program("return_value")
    d = extract_compact(p, t, ExtractOptions(), "functionA")
    assert not [x for x in d.timelines.values() if x.owner == fn(d, t, "functionA")]
    assert validate(d) == []


def test_straight_line_detection():
    assert is_straight_line(load_program("nested_calls")[0])
    assert not is_straight_line(load_program("goto")[0])
    assert not is_straight_line(load_program("try_catch")[0])
