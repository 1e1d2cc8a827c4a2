from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PROGRAMS, compile_source, load_program
from ucdf.core import EdgeKind
from ucdf.extract import CALL_STYLES, GRANULARITIES, GROUPINGS, ExtractOptions, extract
from ucdf.generate import random_program
from ucdf.oracle.conform import Discrepancy, FingerprintMismatch, conform
from ucdf.oracle.interp import RunLimits, RuntimeFault, run
from ucdf.oracle.mutate import mutants, mutation_score
from ucdf.oracle.trace import ROOT, Trace, TraceEvent, TraceFormatError, parse_trace


def trace_of(source: str, entry=None, limits=RunLimits()):
    p, t = compile_source(source)
    return run(p, t, entry, limits)


def events(tr: Trace, name: str) -> list[TraceEvent]:
    return [e for e in tr.events if e.name == name]


class TestTraceFormat:
    def test_round_trip(self):
        p, t = load_program("try_catch")
        tr = run(p, t)
        back = parse_trace(tr.to_text())
        assert back == tr

    def test_header_required(self):
        with pytest.raises(TraceFormatError):
            parse_trace("1\t0\tCall\ta\tb\t@1\n")

    @pytest.mark.parametrize("line", [
        "1\t0\tCall\t@1",
        "x\t0\tCall\ta\t@1",
        "1\t0\tLeap\ta\t@1",
        "1\t0\tCall\ta\t1",
    ])
    def test_malformed_event(self, line):
        with pytest.raises(TraceFormatError):
            parse_trace("# symtab abc\n" + line + "\n")


class TestInterpreter:
    def test_call_and_return(self):
        tr = trace_of("int f(int a) { return a + 1; }\nvoid main() { int x = f(2); }")
        calls = events(tr, "Call")
        assert [c.args[1].split("#")[0] for c in calls] == ["main", "f"]
        assert calls[0].args[0] == ROOT
        assert [r.args[0].split("#")[0] for r in events(tr, "Return")] == ["f", "main"]
        assert any(e.args[0].startswith("ret:f#") for e in events(tr, "Read"))

    def test_unconsumed_result_is_not_read(self):
        tr = trace_of("int f() { return 1; }\nvoid main() { f(); }")
        assert not any(e.args[0].startswith("ret:") for e in events(tr, "Read"))

    def test_loop_and_jumps(self):
        tr = trace_of("""void main() {
    int n = 0;
    while (n < 5) {
        n = n + 1;
        if (n == 2) { continue; }
        if (n == 4) { break; }
    }
}""")
        jumps = [e.args[0] for e in events(tr, "Jump")]
        assert jumps == ["continue", "break"]

    def test_goto(self):
        p, t = load_program("goto")
        tr = run(p, t)
        labels = [e.args[0] for e in events(tr, "Jump") if "#" in e.args[0]]
        assert labels and all(x.startswith("again#") for x in labels)

    def test_exception_unwinds(self):
        p, t = load_program("try_catch")
        tr = run(p, t)
        names = tr.names()
        assert names.index("Throw") < names.index("Catch")
        ret = [e for e in events(tr, "Return") if e.args[0].startswith("check#")]
        assert len(ret) == 1

    def test_spawn_threads(self):
        p, t = load_program("spawn_threads")
        tr = run(p, t)
        assert [e.args[0] for e in events(tr, "Spawn")] == ["1", "2"]
        assert {e.thread for e in events(tr, "Call")} == {0, 1, 2}

    def test_indirect_call(self):
        p, t = load_program("callback")
        tr = run(p, t)
        (ic,) = events(tr, "IndirectCall")
        assert ic.args[1].startswith("func#")
        names = tr.names()
        assert names[names.index("IndirectCall") + 1] == "Call"

    def test_heap(self):
        p, t = load_program("storage")
        tr = run(p, t)
        assert len(events(tr, "Alloc")) == len(events(tr, "Free")) == 1

    def test_static_local_initialized_once(self):
        tr = trace_of("""void f() { static int c = 0; c = c + 1; }
void main() { f(); f(); }""")
        writes = [e for e in events(tr, "Write") if e.args[0].startswith("c#")]
        assert len(writes) == 3

    @pytest.mark.parametrize("src, needle", [
        ("void main() { int n = 0; while (n < 1) { n = n; } }", "step limit"),
        ("void f() { f(); }\nvoid main() { f(); }", "depth"),
        ("void main() { throw 1; }", "uncaught"),
        ("void main() { q = new int; delete q; delete q; }", "free"),
        ("void main() { fn(int) fp; (*fp)(1); }", "null"),
    ])
    def test_runtime_faults(self, src, needle):
        with pytest.raises(RuntimeFault) as info:
            trace_of(src, limits=RunLimits(max_steps=2000))
        assert needle in str(info.value)
        assert isinstance(info.value.trace, Trace)

    def test_deterministic(self):
        p, t = load_program("spawn_threads")
        assert run(p, t).to_text() == run(p, t).to_text()

    def test_fingerprint_matches_symbols(self):
        p, t = load_program("nested_calls")
        assert run(p, t).fingerprint == t.fingerprint()


ALL_OPTIONS = [ExtractOptions(g, c, gr, al) for g, c, gr, al in
               itertools.product(GRANULARITIES, CALL_STYLES, GROUPINGS, (None, 2))]


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_corpus_conforms_under_every_option(path):
    p, t = load_program(path)
    tr = run(p, t)
    for options in ALL_OPTIONS:
        assert conform(extract(p, t, options).diagram, tr) == [], options


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_corpus_conforms_strictly(path):
    p, t = load_program(path)
    assert conform(extract(p, t).diagram, run(p, t), strict_ranks=True) == []


class TestConform:
    def test_fingerprint_mismatch(self):
        p1, t1 = load_program("goto")
        p2, t2 = load_program("storage")
        with pytest.raises(FingerprintMismatch):
            conform(extract(p1, t1).diagram, run(p2, t2))

    def test_missing_dispatch_is_reported(self):
        p, t = load_program("nested_calls")
        d = extract(p, t).diagram
        main = next(tl for tl in d.timelines.values()
                    if d.nodes[tl.owner].name.startswith("void main"))
        main.dispatches = [x for x in main.dispatches if not d.nodes[x.target].name.startswith("int f1")]
        found = conform(d, run(p, t))
        assert any(x.kind == "call" for x in found)
        assert all(isinstance(x, Discrepancy) for x in found)

    def test_swapped_order_is_reported(self):
        p, t = load_program("nested_calls")
        d = extract(p, t).diagram
        tl = next(tl for tl in d.timelines.values() if d.nodes[tl.owner].name.startswith("void main"))
        a, b = tl.dispatches[1], tl.dispatches[2]
        a.target, b.target = b.target, a.target
        a.origin, b.origin = b.origin, a.origin
        assert any(x.kind == "order" for x in conform(d, run(p, t)))

    def test_missing_write_edge(self):
        p, t = load_program("storage")
        d = extract(p, t).diagram
        for eid in [e.id for e in d.edges.values() if e.kind is EdgeKind.CREATE]:
            del d.edges[eid]
        assert [x.kind for x in conform(d, run(p, t))] == ["alloc"]

    def test_exact_check_catches_extra_dispatch(self):
        p, t = load_program("nested_calls")
        d = extract(p, t).diagram
        tl = next(tl for tl in d.timelines.values() if d.nodes[tl.owner].name.startswith("void main"))
        extra = tl.dispatches[1]
        d.append_dispatch(tl.id, tl.end_rank, extra.target, origin=extra.origin + 1000)
        assert any(x.kind == "exact" for x in conform(d, run(p, t)))


class TestMutation:
    @pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
    def test_mutants_are_mostly_killed(self, path):
        p, t = load_program(path)
        score = mutation_score(extract(p, t).diagram, run(p, t))
        assert score.total > 0
        assert score.rate >= 0.9

    def test_mutants_leave_original_intact(self):
        p, t = load_program("goto")
        d = extract(p, t).diagram
        before = len(d.edges)
        assert list(mutants(d, run(p, t)))
        assert len(d.edges) == before


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.booleans())
def test_random_programs_conform(seed, branchy):
    p, t = compile_source(random_program(random.Random(seed), branchy))
    report = extract(p, t)
    assert report.unresolved_indirect_calls == []
    assert conform(report.diagram, run(p, t)) == []
