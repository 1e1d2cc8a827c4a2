from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PROGRAMS, compile_source, load_program
from ucdf.flowc import ast as A
from ucdf.flowc.lexer import LexError, reconstruct, tokenize
from ucdf.flowc.parser import FlowParseError, parse_source
from ucdf.flowc.pointsto import analyze
from ucdf.flowc.printer import print_program, stmt_label
from ucdf.flowc.symbols import CONST_FN, HEAP, STACK, STATIC, SemanticErrors, default_entry, resolve_symbols
from ucdf.generate import random_program


class TestLexer:
    def test_token_kinds(self):
        toks = tokenize('int x = 5; // hi\nf("s", &x);')
        kinds = [t.kind for t in toks]
        assert kinds[:5] == ["keyword", "ident", "punct", "int", "punct"]
        assert "comment" in kinds and "string" in kinds

    def test_maximal_munch(self):
        assert [t.text for t in tokenize("a==b")] == ["a", "==", "b"]

    def test_bad_character(self):
        with pytest.raises(LexError):
            tokenize("int x = 5 $ 3;")

    @pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
    def test_reconstruct_is_exact(self, path):
        src = path.read_text(encoding="utf-8")
        assert reconstruct(src, tokenize(src)) == src


class TestParser:
    def test_function_and_block(self):
        p = parse_source("void f(int a) { int b = a + 1; }\n{ f(2); }")
        f, blk = p.items
        assert isinstance(f, A.FuncDecl) and f.name == "f"
        assert isinstance(blk, A.Block)
        assert isinstance(blk.stmts[0], A.CallStmt)

    def test_statements(self):
        src = """void main() {
            int n = 0;
        top:
            if (n < 3) { n = n + 1; } else { goto top; }
            while (n < 5) { break; }
            try { throw n; } catch (e) { n = e; }
            q = new int;
            delete q;
            spawn main();
        }"""
        body = parse_source(src).items[0].body.stmts
        kinds = [type(s).__name__ for s in body]
        assert kinds == ["VarDecl", "Label", "If", "While", "Try", "HeapAlloc", "Delete", "Spawn"]
        assert body[2].else_ is not None

    def test_indirect_call(self):
        p = parse_source("{ fn(int) fp; (*fp)(5); }")
        call = p.items[0].stmts[1].call
        assert call.indirect and call.callee == "fp"

    def test_types(self):
        p = parse_source("record R { int[4] xs; int* p; fn(int, str) cb; }")
        rec = p.items[0]
        assert [str(type(t).__name__) for t, _ in rec.fields] == ["ArrayType", "PtrType", "FnType"]

    @pytest.mark.parametrize("src", [
        "void f( { }",
        "int x = ;",
        "{ x = 1 }",
        "record { int a; }",
        "void f() { if x { } }",
    ])
    def test_syntax_errors(self, src):
        with pytest.raises(FlowParseError) as info:
            parse_source(src)
        assert info.value.span.line == 1

    def test_node_ids_are_unique(self):
        p, _ = load_program("storage")
        nids = [n.nid for n in A.walk(p)]
        assert len(nids) == len(set(nids))

    @pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
    def test_printer_round_trip(self, path):
        text = print_program(parse_source(path.read_text(encoding="utf-8")))
        assert print_program(parse_source(text)) == text

    def test_stmt_label(self):
        p = parse_source("void f() { int b = 1 + 2; }")
        assert stmt_label(p.items[0].body.stmts[0]) == "int b = 1 + 2"

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6), st.booleans())
    def test_generated_programs_parse_and_print(self, seed, branchy):
        src = random_program(random.Random(seed), branchy)
        text = print_program(parse_source(src))
        assert print_program(parse_source(text)) == text


class TestSymbols:
    def test_storage_classes(self):
        p, t = load_program("storage")
        by_name = {s.name: s for s in t.symbols}
        assert by_name["g"].storage == STATIC
        assert by_name["c"].storage == STACK
        assert by_name["q"].storage == HEAP
        assert by_name["main"].kind == "func"

    def test_function_address_is_constant(self):
        p, t = load_program("callback")
        fp_assign = next(s for s in A.walk(p) if isinstance(s, A.Assign))
        assert t.use(fp_assign.value).storage == CONST_FN

    def test_two_distinct_a(self):
        p, t = load_program("function_call")
        a = [s for s in t.symbols if s.name == "a"]
        assert len(a) == 2 and a[0].sid != a[1].sid
        assert {s.kind for s in a} == {"param", "var"}

    def test_default_entry(self):
        p, t = load_program("goto")
        assert default_entry(p, t) == "main"
        p, t = load_program("callback")
        assert default_entry(p, t) == "{block1}"

    def test_fingerprint_is_stable(self):
        _, t1 = load_program("nested_calls")
        _, t2 = load_program("nested_calls")
        assert t1.fingerprint() == t2.fingerprint()
        assert len(t1.fingerprint()) == 12

    @pytest.mark.parametrize("src, message", [
        ("void main() { x = 1; }", "undeclared identifier 'x'"),
        ("void main() { int x; int x; }", "duplicate declaration"),
        ("void main() { Foo x; }", "unknown type"),
        ("void main() { goto nowhere; }", "missing label"),
        ("void main() { { inner: int x; } goto inner; }", "nested block"),
        ("void main() { break; }", "outside loop"),
        ("void main() { int x; delete x; }", "not a heap variable"),
        ("void f(int a) { }\nvoid main() { f(); }", "expects 1 argument"),
        ("void main() { int x; x(); }", "not a function"),
        ("void main() { int x; (*x)(); }", "not a function pointer"),
        ("int f() { return 1; }\nint g = f();", "global initializers"),
    ])
    def test_semantic_errors(self, src, message):
        with pytest.raises(SemanticErrors) as info:
            resolve_symbols(parse_source(src))
        assert any(message in e.message for e in info.value.errors)

    def test_all_errors_reported(self):
        with pytest.raises(SemanticErrors) as info:
            resolve_symbols(parse_source("void main() { x = 1; y = 2; }"))
        assert len(info.value.errors) == 2


class TestPointsTo:
    def test_unique_target(self):
        p, t = load_program("callback")
        pts = analyze(p, t)
        fp = next(s for s in t.symbols if s.name == "fp")
        assert t[pts.resolve(fp.sid)].name == "func"

    def test_two_targets_are_ambiguous(self):
        p, t = compile_source("""void a(int x) { }
void b(int x) { }
void main() {
    fn(int) fp;
    fp = a;
    fp = b;
    (*fp)(1);
}""")
        fp = next(s for s in t.symbols if s.name == "fp")
        pts = analyze(p, t)
        assert pts.resolve(fp.sid) is None
        assert {t[x].name for x in pts.targets[fp.sid]} == {"a", "b"}

    def test_flow_through_parameter(self):
        p, t = compile_source("""void cb(int x) { }
void call(fn(int) f) { (*f)(3); }
void main() { call(cb); }""")
        f = next(s for s in t.symbols if s.name == "f")
        assert t[analyze(p, t).resolve(f.sid)].name == "cb"
