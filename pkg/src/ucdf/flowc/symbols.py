"""Scope resolution and storage-class assignment for Flow-C.

Every declaration gets its own symbol id, so two variables that share a
name (a caller's ``a`` and a parameter ``a``) never collapse into one holder.
Functions are hoisted within their scope; variables are visible from their
declaration onward.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from ..text import SourceSpan
from . import ast as A
from .printer import type_str

STATIC = "static"
STACK = "stack"
HEAP = "heap"
CONST_FN = "const-fn-address"


@dataclass(frozen=True)
class Symbol:
    sid: int
    name: str
    kind: str  # var | param | func | record | label | catch
    storage: Optional[str]
    type: Optional[A.Type]
    span: SourceSpan
    decl_nid: int
    func: Optional[int]  # enclosing function sid, None at top level

    @property
    def fingerprint(self) -> str:
        return f"{self.name}#{self.sid}"


@dataclass(frozen=True)
class SemanticError:
    span: SourceSpan
    message: str

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.message}"


class SemanticErrors(Exception):
    def __init__(self, errors: list[SemanticError]) -> None:
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


@dataclass
class SymbolTable:
    symbols: list[Symbol] = field(default_factory=list)
    uses: dict[int, int] = field(default_factory=dict)  # use-site nid -> sid
    decls: dict[int, int] = field(default_factory=dict)  # declaring nid -> sid
    bodies: dict[int, A.Node] = field(default_factory=dict)  # func sid -> FuncDecl | Block
    owner: dict[int, int] = field(default_factory=dict)  # statement nid -> func sid
    records: dict[str, A.RecordDecl] = field(default_factory=dict)

    def __getitem__(self, sid: int) -> Symbol:
        return self.symbols[sid - 1]

    def use(self, node) -> Symbol:
        return self[self.uses[node.nid]]

    def decl(self, node) -> Symbol:
        return self[self.decls[node.nid]]

    def functions(self) -> list[Symbol]:
        return [s for s in self.symbols if s.kind == "func"]

    def function_named(self, name: str) -> Optional[Symbol]:
        for s in self.symbols:
            if s.kind == "func" and s.name == name:
                return s
        return None

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for s in self.symbols:
            ty = type_str(s.type) if s.type is not None else "-"
            h.update(f"{s.sid} {s.name} {s.kind} {s.storage} {ty}\n".encode())
        return h.hexdigest()[:12]


def block_function_name(k: int) -> str:
    return f"{{block{k}}}"


class _Resolver:
    def __init__(self) -> None:
        self.t = SymbolTable()
        self.errors: list[SemanticError] = []
        self.scopes: list[dict[str, int]] = []
        self.func: Optional[int] = None
        self.loop_depth = 0
        self.labels: dict[str, tuple[int, int]] = {}  # name -> (sid, block nid)
        self.block_chain: list[int] = []

    def err(self, node, msg: str) -> None:
        self.errors.append(SemanticError(node.span, msg))

    def new(self, node, name: str, kind: str, storage, ty, *, scoped: bool = True) -> int:
        sid = len(self.t.symbols) + 1
        self.t.symbols.append(Symbol(sid, name, kind, storage, ty, node.span, node.nid, self.func))
        self.t.decls.setdefault(node.nid, sid)
        if scoped:
            scope = self.scopes[-1]
            if name in scope:
                self.err(node, f"duplicate declaration of {name!r}")
            scope[name] = sid
        return sid

    def lookup(self, name: str) -> Optional[int]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def check_type(self, node, ty) -> None:
        if isinstance(ty, A.TypeName):
            if ty.name not in ("int", "str", "void") and ty.name not in self.t.records:
                self.err(node, f"unknown type {ty.name!r}")
        elif isinstance(ty, (A.ArrayType, A.PtrType)):
            self.check_type(node, ty.elem)
        elif isinstance(ty, A.FnType):
            for p in ty.params:
                self.check_type(node, p)

    # program ------------------------------------------------------------------

    def program(self, prog: A.Program) -> None:
        self.scopes.append({})
        for item in prog.items:
            if isinstance(item, A.RecordDecl):
                if item.name in self.t.records:
                    self.err(item, f"duplicate record {item.name!r}")
                self.t.records[item.name] = item
                self.new(item, item.name, "record", None, None)
        for item in prog.items:
            if isinstance(item, A.RecordDecl):
                for ty, _ in item.fields:
                    self.check_type(item, ty)
        self.hoist(prog.items)
        k = 0
        for item in prog.items:
            if isinstance(item, A.FuncDecl):
                self.function(item)
            elif isinstance(item, A.VarDecl):
                self.vardecl(item, top=True)
            elif isinstance(item, A.Block):
                k += 1
                sid = self.new(item, block_function_name(k), "func", CONST_FN, A.FnType(()), scoped=False)
                self.t.bodies[sid] = item
                self.enter_function(sid, [], item)

    def hoist(self, items: list) -> None:
        for item in items:
            if isinstance(item, A.FuncDecl):
                ty = A.FnType(tuple(p.type for p in item.params))
                sid = self.new(item, item.name, "func", CONST_FN, ty)
                self.t.bodies[sid] = item

    def function(self, f: A.FuncDecl) -> None:
        self.check_type(f, f.ret)
        self.enter_function(self.t.decls[f.nid], f.params, f.body)

    def enter_function(self, sid: int, params: list, body: A.Block) -> None:
        saved = (self.func, self.loop_depth, self.labels, self.block_chain)
        self.func, self.loop_depth, self.labels, self.block_chain = sid, 0, {}, []
        self.scopes.append({})
        for p in params:
            self.check_type(p, p.type)
            self.new(p, p.name, "param", STACK, p.type)
        self.collect_labels(body)
        self.block(body, new_scope=False)
        self.scopes.pop()
        self.func, self.loop_depth, self.labels, self.block_chain = saved

    def collect_labels(self, body: A.Block) -> None:
        def go(b: A.Block) -> None:
            for s in b.stmts:
                if isinstance(s, A.Label):
                    if s.name in self.labels:
                        self.err(s, f"duplicate label {s.name!r}")
                        continue
                    sid = self.new(s, s.name, "label", None, None, scoped=False)
                    self.labels[s.name] = (sid, b.nid)
                for child in _child_blocks(s):
                    go(child)

        go(body)

    # statements ---------------------------------------------------------------

    def block(self, b: A.Block, new_scope: bool = True) -> None:
        if new_scope:
            self.scopes.append({})
        self.block_chain.append(b.nid)
        self.hoist([s for s in b.stmts if isinstance(s, A.FuncDecl)])
        for s in b.stmts:
            self.t.owner[s.nid] = self.func
            self.stmt(s)
        self.block_chain.pop()
        if new_scope:
            self.scopes.pop()

    def vardecl(self, s: A.VarDecl, top: bool = False) -> None:
        self.check_type(s, s.type)
        if s.init is not None:
            if top and A.expr_calls(s.init):
                self.err(s, "calls are not allowed in global initializers")
            self.expr(s.init)
        storage = STATIC if (top or s.static) else STACK
        self.new(s, s.name, "var", storage, s.type)

    def stmt(self, s) -> None:
        if isinstance(s, A.VarDecl):
            self.vardecl(s)
        elif isinstance(s, A.HeapAlloc):
            self.check_type(s, s.type)
            self.new(s, s.name, "var", HEAP, s.type)
        elif isinstance(s, A.Delete):
            sid = self.lookup(s.name)
            if sid is None:
                self.err(s, f"undeclared identifier {s.name!r}")
            elif self.t[sid].storage != HEAP:
                self.err(s, f"{s.name!r} is not a heap variable")
            else:
                self.t.uses[s.nid] = sid
        elif isinstance(s, A.Assign):
            self.expr(s.value)
            self.lvalue(s.target, write=True)
        elif isinstance(s, A.CallStmt):
            self.expr(s.call)
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value)
        elif isinstance(s, A.If):
            self.expr(s.cond)
            self.block(s.then)
            if s.else_ is not None:
                self.block(s.else_)
        elif isinstance(s, A.While):
            self.expr(s.cond)
            self.loop_depth += 1
            self.block(s.body)
            self.loop_depth -= 1
        elif isinstance(s, A.Goto):
            hit = self.labels.get(s.label)
            if hit is None:
                self.err(s, f"goto to missing label {s.label!r}")
            elif hit[1] not in self.block_chain:
                self.err(s, f"goto into a nested block ({s.label!r})")
            else:
                self.t.uses[s.nid] = hit[0]
        elif isinstance(s, A.Label):
            pass
        elif isinstance(s, (A.Break, A.Continue)):
            if self.loop_depth == 0:
                self.err(s, f"{'break' if isinstance(s, A.Break) else 'continue'} outside loop")
        elif isinstance(s, A.Try):
            self.block(s.body)
            self.scopes.append({})
            self.new(s, s.var, "catch", STACK, None)
            self.block(s.handler)
            self.scopes.pop()
        elif isinstance(s, A.Throw):
            self.expr(s.value)
        elif isinstance(s, A.Spawn):
            self.expr(s.call)
        elif isinstance(s, A.Block):
            self.block(s)
        elif isinstance(s, A.FuncDecl):
            self.function(s)
        else:  # pragma: no cover
            raise TypeError(s)

    # expressions ----------------------------------------------------------------

    def name_use(self, node, name: str) -> Optional[int]:
        sid = self.lookup(name)
        if sid is None:
            self.err(node, f"undeclared identifier {name!r}")
            return None
        self.t.uses[node.nid] = sid
        return sid

    def lvalue(self, e, write: bool = False) -> None:
        if isinstance(e, A.Index):
            self.expr(e.index)
        sid = self.name_use(e, e.name)
        if sid is None:
            return
        kind = self.t[sid].kind
        if kind in ("record", "label") or (write and kind == "func"):
            self.err(e, f"{e.name!r} is not a variable")

    def expr(self, e) -> None:
        if isinstance(e, (A.IntLit, A.StrLit)):
            return
        if isinstance(e, (A.Name, A.Index, A.Field)):
            self.lvalue(e)
        elif isinstance(e, A.AddrOf):
            sid = self.name_use(e, e.name)
            if sid is not None and self.t[sid].kind in ("record", "label"):
                self.err(e, f"cannot take the address of {e.name!r}")
        elif isinstance(e, A.BinOp):
            self.expr(e.left)
            self.expr(e.right)
        elif isinstance(e, A.Call):
            for a in e.args:
                self.expr(a)
            sid = self.name_use(e, e.callee)
            if sid is not None:
                kind = self.t[sid].kind
                sym = self.t[sid]
                if e.indirect and (kind not in ("var", "param", "catch") or (
                        kind != "catch" and not isinstance(sym.type, A.FnType))):
                    self.err(e, f"{e.callee!r} is not a function pointer")
                if not e.indirect and kind != "func":
                    self.err(e, f"{e.callee!r} is not a function")
                elif not e.indirect and len(e.args) != len(self.t[sid].type.params):
                    self.err(e, f"{e.callee!r} expects {len(self.t[sid].type.params)} argument(s)")
        else:  # pragma: no cover
            raise TypeError(e)


def _child_blocks(s) -> list[A.Block]:
    if isinstance(s, A.Block):
        return [s]
    if isinstance(s, A.If):
        return [s.then] + ([s.else_] if s.else_ is not None else [])
    if isinstance(s, A.While):
        return [s.body]
    if isinstance(s, A.Try):
        return [s.body, s.handler]
    return []


def resolve_symbols(program: A.Program) -> SymbolTable:
    """Resolve every identifier; raises :class:`SemanticErrors` on failure."""
    r = _Resolver()
    r.program(program)
    if r.errors:
        raise SemanticErrors(r.errors)
    return r.t


def default_entry(program: A.Program, table: SymbolTable) -> Optional[str]:
    """``main`` if declared, else the first top-level block."""
    if table.function_named("main") is not None:
        return "main"
    if any(isinstance(i, A.Block) for i in program.items):
        return block_function_name(1)
    return None
