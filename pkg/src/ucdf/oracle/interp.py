"""Tree-walking reference interpreter for Flow-C.

Execution is single-threaded and deterministic: ``spawn`` runs the child
thread to completion at the spawn point under a fresh thread id.  Values
are dynamically typed (int, str, record dicts, array lists, function or
variable addresses); types only pick the default value of a declaration.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

from ..flowc import ast as A
from ..flowc.symbols import HEAP, STATIC, Symbol, SymbolTable
from ..text import SourceSpan
from .trace import ROOT, Trace, TraceEvent

MAX_DEPTH = 150


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 100000
    max_threads: int = 64

    def __post_init__(self) -> None:
        if self.max_steps < 1 or self.max_threads < 1:
            raise ValueError("run limits must be positive")


class RuntimeFault(Exception):
    def __init__(self, message: str, span: Optional[SourceSpan], trace: Trace) -> None:
        self.span = span
        self.trace = trace
        where = f"{span.line}:{span.column}: " if span else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class FnAddr:
    sid: int


@dataclass(frozen=True)
class VarAddr:
    sid: int


class _Return(Exception):
    pass


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Goto(Exception):
    def __init__(self, label_sid: int) -> None:
        self.label = label_sid


class _Throw(Exception):
    def __init__(self, value, node) -> None:
        self.value = value
        self.node = node


class _Fault(Exception):
    def __init__(self, message: str, node=None) -> None:
        self.message = message
        self.node = node


class _Cell:
    __slots__ = ("value", "freed")

    def __init__(self, value) -> None:
        self.value = value
        self.freed = False


class _Frame:
    def __init__(self, fn: int) -> None:
        self.fn = fn
        self.cells: dict[int, _Cell] = {}


class Interpreter:
    def __init__(self, program: A.Program, table: SymbolTable, limits: RunLimits = RunLimits()):
        self.p = program
        self.t = table
        self.limits = limits
        self.trace = Trace(table.fingerprint())
        self.statics: dict[int, _Cell] = {}
        self.stack: list[_Frame] = []
        self.thread = 0
        self.threads = 1
        self.steps = 0

    # bookkeeping ------------------------------------------------------------------

    def emit(self, name: str, origin: int, *args: str) -> None:
        ev = TraceEvent(len(self.trace.events) + 1, self.thread, name, tuple(args), origin)
        self.trace.events.append(ev)

    def step(self, node) -> None:
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise _Fault("step limit exceeded", node)

    def fp(self, sid: int) -> str:
        return self.t[sid].fingerprint

    def default(self, ty):
        if isinstance(ty, A.TypeName):
            if ty.name == "int":
                return 0
            if ty.name == "str":
                return ""
            rec = self.t.records.get(ty.name)
            if rec is not None:
                return {name: self.default(fty) for fty, name in rec.fields}
            return 0
        if isinstance(ty, A.ArrayType):
            return [self.default(ty.elem) for _ in range(ty.size)]
        return None  # fn and pointer types start out null

    def cell(self, sym: Symbol, node) -> _Cell:
        if sym.storage == STATIC:
            c = self.statics.get(sym.sid)
        else:
            c = None
            for frame in reversed(self.stack):
                c = frame.cells.get(sym.sid)
                if c is not None:
                    break
        if c is None:
            raise _Fault(f"{sym.name!r} used before initialization", node)
        return c

    def declare(self, sym: Symbol, value) -> _Cell:
        c = _Cell(value)
        if sym.storage == STATIC:
            self.statics[sym.sid] = c
        else:
            self.stack[-1].cells[sym.sid] = c
        return c

    # entry ------------------------------------------------------------------------

    def run(self, entry: Symbol) -> Trace:
        body = self.t.bodies[entry.sid]
        if isinstance(body, A.FuncDecl) and body.params:
            raise ValueError(f"entry {entry.name!r} takes parameters")
        try:
            self.stack.append(_Frame(0))
            for item in self.p.items:
                if isinstance(item, A.VarDecl):
                    self.vardecl(item)
            self.emit("Call", entry.decl_nid, ROOT, self.fp(entry.sid))
            self.invoke(entry.sid, [], entry.decl_nid)
        except _Fault as f:
            raise RuntimeFault(f.message, f.node.span if f.node else None, self.trace) from None
        except _Throw as t:
            raise RuntimeFault("uncaught throw", t.node.span, self.trace) from None
        except RecursionError:
            raise RuntimeFault("call depth exceeded", None, self.trace) from None
        return self.trace

    def invoke(self, fsid: int, args: list, call_nid: int) -> object:
        """Run a function body with already evaluated arguments; returns its result."""
        if len(self.stack) > MAX_DEPTH:
            raise _Fault("call depth exceeded")
        body = self.t.bodies[fsid]
        frame = _Frame(fsid)
        self.stack.append(frame)
        end_origin = self.t[fsid].decl_nid
        try:
            params = body.params if isinstance(body, A.FuncDecl) else []
            for p, v in zip(params, args):
                sym = self.t.decl(p)
                frame.cells[sym.sid] = _Cell(v)
                self.emit("Write", call_nid, sym.fingerprint)
            block = body.body if isinstance(body, A.FuncDecl) else body
            try:
                self.stmts(block.stmts)
            except _Return as r:
                end_origin = r.args[0]
            except (_Goto, _Break, _Continue):  # pragma: no cover - rejected statically
                raise _Fault("jump out of function")
            return frame.cells.get(-1, _Cell(None)).value
        finally:
            self.emit("Return", end_origin, self.fp(fsid))
            self.stack.pop()

    # statements -------------------------------------------------------------------

    def stmts(self, stmts: list) -> None:
        i = 0
        while i < len(stmts):
            try:
                self.stmt(stmts[i])
                i += 1
            except _Goto as g:
                for j, s in enumerate(stmts):
                    if isinstance(s, A.Label) and self.t.decls.get(s.nid) == g.label:
                        i = j + 1
                        break
                else:
                    raise

    def block(self, b: A.Block, role: str) -> None:
        self.emit("EnterBlock", b.nid, role)
        try:
            self.stmts(b.stmts)
        finally:
            self.emit("ExitBlock", b.nid, role)

    def vardecl(self, s: A.VarDecl) -> None:
        sym = self.t.decl(s)
        if sym.storage == STATIC and sym.sid in self.statics:
            return  # static locals are initialized once
        value = self.default(s.type) if s.init is None else self.eval(s.init, s.nid)
        self.declare(sym, value)
        self.emit("Write", s.nid, sym.fingerprint)

    def stmt(self, s) -> None:
        self.step(s)
        if isinstance(s, A.VarDecl):
            self.vardecl(s)
        elif isinstance(s, A.HeapAlloc):
            sym = self.t.decl(s)
            self.declare(sym, self.default(s.type))
            self.emit("Alloc", s.nid, sym.fingerprint)
        elif isinstance(s, A.Delete):
            sym = self.t.use(s)
            c = self.cell(sym, s)
            if c.freed:
                raise _Fault(f"{sym.name!r} freed twice", s)
            c.freed = True
            self.emit("Free", s.nid, sym.fingerprint)
        elif isinstance(s, A.Assign):
            value = self.eval(s.value, s.nid)
            self.store(s.target, value, s.nid)
        elif isinstance(s, A.CallStmt):
            self.call(s.call, consumed=False)
        elif isinstance(s, A.Return):
            if s.value is not None:
                value = self.eval(s.value, s.nid)
                f = self.stack[-1].fn
                self.stack[-1].cells[-1] = _Cell(value)
                body = self.t.bodies[f]
                if isinstance(body, A.FuncDecl) and body.ret != A.TypeName("void"):
                    self.emit("Write", s.nid, f"ret:{self.fp(f)}")
            raise _Return(s.nid)
        elif isinstance(s, A.If):
            if self.truthy(self.eval(s.cond, s.nid)):
                self.block(s.then, "then")
            elif s.else_ is not None:
                self.block(s.else_, "else")
        elif isinstance(s, A.While):
            while self.truthy(self.eval(s.cond, s.nid)):
                self.step(s)
                try:
                    self.block(s.body, "loop")
                except _Break:
                    break
                except _Continue:
                    continue
        elif isinstance(s, A.Goto):
            label = self.t.uses[s.nid]
            self.emit("Jump", s.nid, self.fp(label))
            raise _Goto(label)
        elif isinstance(s, A.Label):
            pass
        elif isinstance(s, A.Break):
            self.emit("Jump", s.nid, "break")
            raise _Break()
        elif isinstance(s, A.Continue):
            self.emit("Jump", s.nid, "continue")
            raise _Continue()
        elif isinstance(s, A.Try):
            try:
                self.block(s.body, "try")
            except _Throw as t:
                sym = self.t.decl(s)
                self.emit("Catch", s.nid, sym.fingerprint)
                self.declare(sym, t.value)
                self.emit("Write", s.nid, sym.fingerprint)
                self.block(s.handler, "catch")
        elif isinstance(s, A.Throw):
            value = self.eval(s.value, s.nid)
            self.emit("Throw", s.nid)
            raise _Throw(value, s)
        elif isinstance(s, A.Spawn):
            self.spawn(s)
        elif isinstance(s, A.Block):
            self.block(s, "block")
        elif isinstance(s, A.FuncDecl):
            pass
        else:  # pragma: no cover
            raise TypeError(s)

    def spawn(self, s: A.Spawn) -> None:
        fsid, args = self.prepare_call(s.call)
        if self.threads >= self.limits.max_threads:
            raise _Fault("thread limit exceeded", s)
        child = self.threads
        self.threads += 1
        self.emit("Spawn", s.nid, str(child))
        caller = self.stack[-1].fn
        parent = self.thread
        self.thread = child
        try:
            self.emit("Call", s.call.nid, self.fp(caller) if caller else ROOT, self.fp(fsid))
            self.invoke(fsid, args, s.call.nid)
        except _Throw as t:
            raise _Fault("uncaught throw in spawned thread", t.node) from None
        finally:
            self.thread = parent

    # expressions ------------------------------------------------------------------

    @staticmethod
    def truthy(v) -> bool:
        if v is None:
            return False
        if isinstance(v, (int, str)):
            return bool(v)
        return True

    def read(self, sym: Symbol, node, origin: int) -> _Cell:
        c = self.cell(sym, node)
        if c.freed:
            raise _Fault(f"read of freed holder {sym.name!r}", node)
        self.emit("Read", origin, sym.fingerprint)
        return c

    def eval(self, e, origin: int):
        if isinstance(e, (A.IntLit, A.StrLit)):
            return e.value
        if isinstance(e, A.Name):
            sym = self.t.use(e)
            if sym.kind == "func":
                self.emit("Read", origin, sym.fingerprint)
                return FnAddr(sym.sid)
            return copy.deepcopy(self.read(sym, e, origin).value)
        if isinstance(e, A.Index):
            i = self.eval(e.index, origin)
            arr = self.read(self.t.use(e), e, origin).value
            if not isinstance(arr, list) or not isinstance(i, int) or not 0 <= i < len(arr):
                raise _Fault("bad array index", e)
            return copy.deepcopy(arr[i])
        if isinstance(e, A.Field):
            rec = self.read(self.t.use(e), e, origin).value
            if not isinstance(rec, dict) or e.field not in rec:
                raise _Fault(f"no field {e.field!r}", e)
            return copy.deepcopy(rec[e.field])
        if isinstance(e, A.AddrOf):
            sym = self.t.use(e)
            return FnAddr(sym.sid) if sym.kind == "func" else VarAddr(sym.sid)
        if isinstance(e, A.BinOp):
            return self.binop(e, self.eval(e.left, origin), self.eval(e.right, origin))
        if isinstance(e, A.Call):
            return self.call(e, consumed=True)
        raise TypeError(e)  # pragma: no cover

    def binop(self, e: A.BinOp, a, b):
        if e.op == "==":
            return int(a == b)
        if isinstance(a, int) and isinstance(b, int):
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            return int(a < b)
        if isinstance(a, str) and isinstance(b, str) and e.op in ("+", "<"):
            return a + b if e.op == "+" else int(a < b)
        raise _Fault(f"operands of {e.op!r} have incompatible types", e)

    def store(self, target, value, origin: int) -> None:
        sym = self.t.use(target)
        if isinstance(target, A.Index):
            i = self.eval(target.index, origin)
            arr = self.cell(sym, target).value
            if not isinstance(arr, list) or not isinstance(i, int) or not 0 <= i < len(arr):
                raise _Fault("bad array index", target)
            arr[i] = value
        elif isinstance(target, A.Field):
            rec = self.cell(sym, target).value
            if not isinstance(rec, dict) or target.field not in rec:
                raise _Fault(f"no field {target.field!r}", target)
            rec[target.field] = value
        else:
            self.cell(sym, target).value = value
        self.emit("Write", origin, sym.fingerprint)

    def prepare_call(self, c: A.Call) -> tuple[int, list]:
        args = [self.eval(a, c.nid) for a in c.args]
        sym = self.t.use(c)
        if not c.indirect:
            return sym.sid, args
        target = self.cell(sym, c).value
        if not isinstance(target, FnAddr):
            raise _Fault(f"indirect call through null {sym.name!r}", c)
        self.emit("IndirectCall", c.nid, sym.fingerprint, self.fp(target.sid))
        body = self.t.bodies[target.sid]
        params = body.params if isinstance(body, A.FuncDecl) else []
        if len(params) != len(args):
            raise _Fault(f"{self.t[target.sid].name!r} called with wrong arity", c)
        return target.sid, args

    def call(self, c: A.Call, consumed: bool):
        self.step(c)
        fsid, args = self.prepare_call(c)
        caller = self.stack[-1].fn
        self.emit("Call", c.nid, self.fp(caller) if caller else ROOT, self.fp(fsid))
        result = self.invoke(fsid, args, c.nid)
        body = self.t.bodies[fsid]
        if consumed and isinstance(body, A.FuncDecl) and body.ret != A.TypeName("void"):
            self.emit("Read", c.nid, f"ret:{self.fp(fsid)}")
        return result


def run(program: A.Program, table: SymbolTable, entry: Optional[str] = None,
        limits: RunLimits = RunLimits()) -> Trace:
    """Execute ``entry`` (default: main, else the first top-level block)."""
    from ..extract import resolve_entry

    sym = resolve_entry(program, table, entry)
    return Interpreter(program, table, limits).run(sym)
