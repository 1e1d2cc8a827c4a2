"""Recursive-descent parser for Flow-C.

Grammar (EBNF)::

    program   = { recorddecl | globaldecl | funcdecl | block } ;
    recorddecl= "record" IDENT "{" { type IDENT ";" } "}" ;
    funcdecl  = ("void"|type) IDENT "(" [ param {"," param} ] ")" block ;
    type      = ( "int" | "str" | IDENT | "fn" "(" [type {"," type}] ")" )
                { "[" INT "]" | "*" } ;
    stmt      = vardecl | "delete" IDENT ";" | lvalue "=" expr ";" | call ";"
              | "return" [expr] ";" | "if" "(" expr ")" block [ "else" block ]
              | "while" "(" expr ")" block | "goto" IDENT ";" | IDENT ":"
              | "break" ";" | "continue" ";"
              | "try" block "catch" "(" IDENT ")" block | "throw" expr ";"
              | "spawn" call ";" | block | funcdecl ;
    vardecl   = ["static"] type IDENT [ "=" expr | "(" expr ")" ] ";"
              | IDENT "=" "new" type ";" ;
    expr      = primary { ("+"|"-"|"=="|"<") primary } ;   left-assoc, one tier

Decisions between a declaration and an assignment or call need a few tokens
of lookahead (``arg a(5);`` versus ``arg(5);``); the parser peeks but never
backtracks.
"""

from __future__ import annotations

from typing import Optional

from ..text import SourceSpan
from . import ast as A
from .lexer import Token, tokenize

BINOPS = ("+", "-", "==", "<")


class FlowParseError(Exception):
    def __init__(self, span: SourceSpan, expected: str, found: str) -> None:
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(f"{span.line}:{span.column}: expected {expected}, found {found}")


class Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.comments = [t for t in tokens if t.kind == "comment"]
        self.toks = [t for t in tokens if t.kind != "comment"]
        self.i = 0
        self._nid = 0

    # token plumbing ---------------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, kind: str, text: Optional[str] = None, k: int = 0) -> bool:
        t = self.peek(k)
        return t is not None and t.is_(kind, text)

    def fail(self, expected: str) -> FlowParseError:
        t = self.peek()
        if t is None:
            last = self.toks[-1].span if self.toks else SourceSpan(1, 1, 0)
            return FlowParseError(SourceSpan(last.line, last.column + last.length, 0),
                                  expected, "end of input")
        return FlowParseError(t.span, expected, repr(t.text))

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            raise self.fail(what or repr(text or kind))
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            t = self.toks[self.i]
            self.i += 1
            return t
        return None

    def mk(self, cls, tok: Token, **kw):
        self._nid += 1
        return cls(span=tok.span, nid=self._nid, **kw)

    # program ------------------------------------------------------------------

    def program(self) -> A.Program:
        start = self.peek()
        prog = A.Program(span=start.span if start else SourceSpan(1, 1, 0), nid=0, items=[])
        while self.peek() is not None:
            if self.at("keyword", "record"):
                prog.items.append(self.recorddecl())
            elif self.at("punct", "{"):
                prog.items.append(self.block())
            else:
                prog.items.append(self.declaration())
        prog.comments = self.comments
        return prog

    def recorddecl(self) -> A.RecordDecl:
        kw = self.expect("keyword", "record")
        name = self.expect("ident", what="record name").text
        node = self.mk(A.RecordDecl, kw, name=name, fields=[])
        self.expect("punct", "{")
        while not self.accept("punct", "}"):
            ty = self.type_()
            fname = self.expect("ident", what="field name").text
            self.expect("punct", ";")
            node.fields.append((ty, fname))
        return node

    # types --------------------------------------------------------------------

    def type_(self) -> A.Type:
        t = self.peek()
        if t is None:
            raise self.fail("type")
        if t.is_("keyword", "int") or t.is_("keyword", "str"):
            self.i += 1
            ty: A.Type = A.TypeName(t.text)
        elif t.is_("keyword", "fn"):
            self.i += 1
            self.expect("punct", "(")
            params = []
            if not self.at("punct", ")"):
                params.append(self.type_())
                while self.accept("punct", ","):
                    params.append(self.type_())
            self.expect("punct", ")")
            ty = A.FnType(tuple(params))
        elif t.kind == "ident":
            self.i += 1
            ty = A.TypeName(t.text)
        else:
            raise self.fail("type")
        while True:
            if self.at("punct", "[") and self.at("int", k=1) and self.at("punct", "]", k=2):
                self.i += 1
                size = int(self.expect("int").text)
                self.expect("punct", "]")
                ty = A.ArrayType(ty, size)
            elif self.at("punct", "*"):
                self.i += 1
                ty = A.PtrType(ty)
            else:
                return ty

    def _type_length(self, k: int = 0) -> int:
        """Number of tokens a type starting at offset k spans (0 if none)."""
        t = self.peek(k)
        if t is None:
            return 0
        if t.is_("keyword", "int") or t.is_("keyword", "str") or t.kind == "ident":
            n = 1
        elif t.is_("keyword", "fn"):
            if not self.at("punct", "(", k + 1):
                return 0
            depth, n = 0, 1
            while True:
                u = self.peek(k + n)
                if u is None:
                    return 0
                n += 1
                if u.is_("punct", "("):
                    depth += 1
                elif u.is_("punct", ")"):
                    depth -= 1
                    if depth == 0:
                        break
        else:
            return 0
        while True:
            if (self.at("punct", "[", k + n) and self.at("int", k=k + n + 1)
                    and self.at("punct", "]", k + n + 2)):
                n += 3
            elif self.at("punct", "*", k + n):
                n += 1
            else:
                return n

    def looks_like_decl(self) -> bool:
        n = self._type_length()
        return n > 0 and self.at("ident", k=n)

    # declarations ---------------------------------------------------------------

    def declaration(self):
        start = self.peek()
        if start is None:
            raise self.fail("declaration")
        static = self.accept("keyword", "static") is not None
        if self.at("keyword", "void"):
            if static:
                raise self.fail("type")
            self.i += 1
            ret: A.Type = A.TypeName("void")
            name_tok = self.expect("ident", what="function name")
            return self.funcdecl_rest(start, ret, name_tok)
        if not self.looks_like_decl():
            raise self.fail("declaration")
        ty = self.type_()
        name_tok = self.expect("ident", what="identifier")
        if not static and self.at("punct", "(") and self._paren_then_block():
            return self.funcdecl_rest(start, ty, name_tok)
        return self.vardecl_rest(start, static, ty, name_tok)

    def _paren_then_block(self) -> bool:
        depth = 0
        k = 0
        while True:
            t = self.peek(k)
            if t is None:
                return False
            if t.is_("punct", "("):
                depth += 1
            elif t.is_("punct", ")"):
                depth -= 1
                if depth == 0:
                    return self.at("punct", "{", k + 1)
            k += 1

    def funcdecl_rest(self, start: Token, ret: A.Type, name_tok: Token) -> A.FuncDecl:
        node = self.mk(A.FuncDecl, start, ret=ret, name=name_tok.text, params=[], body=None)
        self.expect("punct", "(")
        if not self.at("punct", ")"):
            while True:
                pt = self.peek()
                if pt is None:
                    raise self.fail("parameter")
                ty = self.type_()
                pname = self.expect("ident", what="parameter name").text
                node.params.append(self.mk(A.Param, pt, type=ty, name=pname))
                if not self.accept("punct", ","):
                    break
        self.expect("punct", ")")
        node.body = self.block()
        return node

    def vardecl_rest(self, start: Token, static: bool, ty: A.Type, name_tok: Token) -> A.VarDecl:
        node = self.mk(A.VarDecl, start, static=static, type=ty, name=name_tok.text)
        if self.accept("punct", "="):
            node.init = self.expr()
        elif self.accept("punct", "("):
            node.init = self.expr()
            node.paren_init = True
            self.expect("punct", ")")
        self.expect("punct", ";")
        return node

    # statements -------------------------------------------------------------------

    def block(self) -> A.Block:
        lb = self.expect("punct", "{")
        node = self.mk(A.Block, lb, stmts=[])
        while not self.accept("punct", "}"):
            if self.peek() is None:
                raise self.fail("'}'")
            node.stmts.append(self.statement())
        return node

    def statement(self):
        t = self.peek()
        if t.is_("punct", "{"):
            return self.block()
        if t.kind == "keyword":
            kw = t.text
            if kw == "delete":
                self.i += 1
                name = self.expect("ident", what="heap variable").text
                self.expect("punct", ";")
                return self.mk(A.Delete, t, name=name)
            if kw == "return":
                self.i += 1
                node = self.mk(A.Return, t)
                if not self.at("punct", ";"):
                    node.value = self.expr()
                self.expect("punct", ";")
                return node
            if kw == "if":
                self.i += 1
                node = self.mk(A.If, t, cond=None, then=None)
                self.expect("punct", "(")
                node.cond = self.expr()
                self.expect("punct", ")")
                node.then = self.block()
                if self.accept("keyword", "else"):
                    node.else_ = self.block()
                return node
            if kw == "while":
                self.i += 1
                node = self.mk(A.While, t, cond=None, body=None)
                self.expect("punct", "(")
                node.cond = self.expr()
                self.expect("punct", ")")
                node.body = self.block()
                return node
            if kw == "goto":
                self.i += 1
                label = self.expect("ident", what="label").text
                self.expect("punct", ";")
                return self.mk(A.Goto, t, label=label)
            if kw in ("break", "continue"):
                self.i += 1
                self.expect("punct", ";")
                return self.mk(A.Break if kw == "break" else A.Continue, t)
            if kw == "try":
                self.i += 1
                node = self.mk(A.Try, t, body=None, var="", handler=None)
                node.body = self.block()
                self.expect("keyword", "catch")
                self.expect("punct", "(")
                node.var = self.expect("ident", what="catch variable").text
                self.expect("punct", ")")
                node.handler = self.block()
                return node
            if kw == "throw":
                self.i += 1
                node = self.mk(A.Throw, t, value=self.expr())
                self.expect("punct", ";")
                return node
            if kw == "spawn":
                self.i += 1
                node = self.mk(A.Spawn, t, call=self.call())
                self.expect("punct", ";")
                return node
            return self.declaration()
        if t.is_("punct", "("):
            node = self.mk(A.CallStmt, t, call=self.call())
            self.expect("punct", ";")
            return node
        if t.kind == "ident":
            if self.at("punct", ":", 1):
                self.i += 2
                return self.mk(A.Label, t, name=t.text)
            if self.at("punct", "(", 1):
                node = self.mk(A.CallStmt, t, call=self.call())
                self.expect("punct", ";")
                return node
            if self.at("punct", "=", 1) and self.at("keyword", "new", 2):
                self.i += 3
                node = self.mk(A.HeapAlloc, t, name=t.text, type=self.type_())
                self.expect("punct", ";")
                return node
            if self.looks_like_decl():
                return self.declaration()
            node = self.mk(A.Assign, t, target=self.lvalue(), value=None)
            self.expect("punct", "=")
            node.value = self.expr()
            self.expect("punct", ";")
            return node
        raise self.fail("statement")

    # expressions -------------------------------------------------------------------

    def lvalue(self):
        t = self.expect("ident", what="variable")
        if self.accept("punct", "["):
            node = self.mk(A.Index, t, name=t.text, index=self.expr())
            self.expect("punct", "]")
            return node
        if self.accept("punct", "."):
            f = self.expect("ident", what="field name").text
            return self.mk(A.Field, t, name=t.text, field=f)
        return self.mk(A.Name, t, name=t.text)

    def call(self) -> A.Call:
        t = self.peek()
        if t is not None and t.is_("punct", "("):
            self.i += 1
            self.expect("punct", "*")
            name = self.expect("ident", what="function pointer").text
            self.expect("punct", ")")
            node = self.mk(A.Call, t, callee=name, indirect=True, args=[])
        else:
            name_tok = self.expect("ident", what="function name")
            node = self.mk(A.Call, name_tok, callee=name_tok.text, indirect=False, args=[])
        self.expect("punct", "(")
        if not self.at("punct", ")"):
            node.args.append(self.expr())
            while self.accept("punct", ","):
                node.args.append(self.expr())
        self.expect("punct", ")")
        return node

    def expr(self):
        left = self.primary()
        while True:
            t = self.peek()
            if t is None or t.kind != "punct" or t.text not in BINOPS:
                return left
            self.i += 1
            right = self.primary()
            left = A.BinOp(span=left.span, nid=self._bump(), op=t.text, left=left, right=right)

    def _bump(self) -> int:
        self._nid += 1
        return self._nid

    def primary(self):
        t = self.peek()
        if t is None:
            raise self.fail("expression")
        if t.kind == "int":
            self.i += 1
            return self.mk(A.IntLit, t, value=int(t.text))
        if t.kind == "string":
            self.i += 1
            return self.mk(A.StrLit, t, value=_unescape(t.text))
        if t.is_("punct", "&"):
            self.i += 1
            name = self.expect("ident", what="variable or function").text
            return self.mk(A.AddrOf, t, name=name)
        if t.is_("punct", "("):
            if self.at("punct", "*", 1):
                return self.call()
            self.i += 1
            inner = self.expr()
            self.expect("punct", ")")
            return inner
        if t.kind == "ident":
            if self.at("punct", "(", 1):
                return self.call()
            return self.lvalue()
        raise self.fail("expression")


def _unescape(s: str) -> str:
    body = s[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append({"n": "\n"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


def parse_program(tokens: list[Token]) -> A.Program:
    return Parser(tokens).program()


def parse_source(source: str) -> A.Program:
    return parse_program(tokenize(source))
