"""Static extraction of a UCDF diagram from a resolved Flow-C program.

Every node the extractor creates carries two in-memory annotations:
``attrs["key"]`` names the program entity it stands for (stable across
granularities and call styles, so diagrams can be compared), and
``attrs["origin"]`` is the AST id of the construct that produced it.  Edges
and dispatches record the AST ids of the statements or calls they come from
in ``origins`` / ``origin``; the conformance checker matches trace events on
those ids.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

from .core import (
    Diagram,
    EdgeKind,
    HolderKind,
    NodeKind,
    NodeRef,
    TimelinePos,
    contract,
)
from .core.model import IDENT_RE
from .flowc import ast as A
from .flowc.pointsto import analyze
from .flowc.printer import expr_str, signature, stmt_label, type_str
from .flowc.symbols import HEAP, STATIC, Symbol, SymbolTable, default_entry
from .text import RESERVED, SourceSpan

GRANULARITIES = ("operator", "block", "function")
CALL_STYLES = ("simplified", "full")
GROUPINGS = ("has_edges", "euler")

# statements that survive as their own process box at block granularity
_BLOCK_LEVEL = (A.If, A.While, A.Block, A.Label, A.Goto, A.Break, A.Continue, A.Try, A.Throw,
                A.Spawn)


class ExtractError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractOptions:
    granularity: str = "operator"
    call_style: str = "simplified"
    grouping: str = "has_edges"
    alias_threshold: Optional[int] = None  # None means off
    entry: Optional[str] = None  # default: main, else the first top-level block
    module_name: str = "program"

    def __post_init__(self) -> None:
        if self.granularity not in GRANULARITIES:
            raise ExtractError(f"unknown granularity {self.granularity!r}")
        if self.call_style not in CALL_STYLES:
            raise ExtractError(f"unknown call style {self.call_style!r}")
        if self.grouping not in GROUPINGS:
            raise ExtractError(f"unknown grouping {self.grouping!r}")
        if self.alias_threshold is not None and self.alias_threshold < 2:
            raise ExtractError("alias threshold must be at least 2")


@dataclass
class ExtractReport:
    diagram: Diagram
    stats: dict
    unresolved_indirect_calls: list[tuple[SourceSpan, str]] = field(default_factory=list)


@dataclass(frozen=True)
class _Ctx:
    fn: int  # function sid
    tl: int  # timeline receiving dispatches
    owner: int  # process owning new holders; folded statements attach here
    loop: Optional[tuple[int, int, int]] = None  # (parent timeline, decision node, loop timeline)
    handler: Optional[int] = None  # timeline of the innermost lexical catch handler


def is_straight_line(program: A.Program) -> bool:
    """No branching, looping, jumping or early exit anywhere."""
    for node in A.walk(program):
        if isinstance(node, (A.If, A.While, A.Goto, A.Break, A.Continue, A.Try, A.Throw)):
            return False
        if isinstance(node, A.Block):
            for s in node.stmts[:-1]:
                if isinstance(s, A.Return):
                    return False
    return True


def _is_transfer(value, table: SymbolTable) -> bool:
    """Values drawn as a bare DataFlow: call results and function addresses."""
    if isinstance(value, A.Call):
        return True
    if isinstance(value, (A.Name, A.AddrOf)):
        return table.use(value).kind == "func"
    return False


class _Extractor:
    def __init__(self, program: A.Program, table: SymbolTable, opts: ExtractOptions) -> None:
        self.p = program
        self.t = table
        self.o = opts
        self.pt = analyze(program, table)
        self.d = Diagram()
        self.holders: dict[str, int] = {}
        self.fn_proc: dict[int, int] = {}
        self.params: dict[int, list[int]] = {}
        self.ret: dict[int, int] = {}
        self.last_rank: dict[int, int] = {}
        self.pos: dict[int, tuple[int, int]] = {}  # node -> (timeline, rank) of its dispatch
        self.label_node: dict[int, int] = {}  # label sid -> node
        self.deferred: list[tuple[int, int, tuple]] = []  # (src node, origin, target spec)
        self.edge_index: dict[tuple, int] = {}
        self.unresolved: list[tuple[SourceSpan, str]] = []
        self.threads = 0
        self.tmps = 0
        self.decl_node: dict[int, int] = {}  # declaring AST nid -> node (for comments)

    # low-level helpers ----------------------------------------------------------

    def ident(self, hint: str) -> str:
        base = re.sub(r"[^A-Za-z0-9_]+", "_", hint).strip("_") or "x"
        if not IDENT_RE.fullmatch(base) or base in RESERVED:
            base = "x_" + base
        cand, k = base, 1
        while self.d.lookup(cand) is not None:
            k += 1
            cand = f"{base}_{k}"
        return cand

    def node(self, kind, name: str, hint: str, key: str, content: str = "",
             origin: Optional[int] = None, **attrs) -> int:
        attrs["key"] = key
        if origin is not None:
            attrs["origin"] = origin
        return self.d.add_node(kind, name, content, ident=self.ident(hint), attrs=attrs)

    def edge(self, kind: EdgeKind, src, dst, origins=(), count: int = 1) -> int:
        src = NodeRef(src) if isinstance(src, int) else src
        dst = NodeRef(dst) if isinstance(dst, int) else dst
        k = (kind, src, dst, count)
        eid = self.edge_index.get(k)
        if eid is not None:
            e = self.d.edges[eid]
            e.origins = e.origins | frozenset(origins)
            return eid
        eid = self.d.add_edge(kind, src, dst, count, origins)
        self.edge_index[k] = eid
        return eid

    def own(self, child: int, owner: int) -> None:
        if self.o.grouping == "has_edges":
            self.edge(EdgeKind.HAS, owner, child)
        else:
            self.d.set_container(child, owner)

    def timeline(self, owner: Optional[int], **attrs) -> int:
        label = attrs.pop("root_label", "")
        tl = self.d.add_timeline(owner, root_label=label, attrs=attrs)
        self.last_rank[tl] = 0
        return tl

    def dispatch(self, tl: int, target: int, origin: Optional[int]) -> int:
        rank = self.last_rank[tl] + 1
        self.last_rank[tl] = rank
        self.d.append_dispatch(tl, rank, target, origin=origin)
        self.pos.setdefault(target, (tl, rank))
        return rank

    # holders -----------------------------------------------------------------------

    @staticmethod
    def base_kind(sym: Symbol, ty) -> HolderKind:
        if isinstance(ty, (A.FnType, A.PtrType)):
            return HolderKind.ADDRESS
        if isinstance(ty, A.ArrayType):
            return HolderKind.COLLECTION
        return {STATIC: HolderKind.STATIC, HEAP: HolderKind.HEAP}.get(sym.storage, HolderKind.STACK)

    def var_holder(self, sym: Symbol, owner: int) -> int:
        key = f"sym:{sym.sid}"
        if key in self.holders:
            return self.holders[key]
        content = type_str(sym.type) if sym.type is not None else ""
        h = self.node(self.base_kind(sym, sym.type), sym.name, sym.name, key, content,
                      decl=sym.decl_nid, sym=sym.fingerprint)
        self.holders[key] = h
        self.decl_node.setdefault(sym.decl_nid, h)
        self.own(h, owner)
        if isinstance(sym.type, A.TypeName) and sym.type.name in self.t.records:
            self.edge(EdgeKind.IS, h, self.holders[f"rec:{sym.type.name}"])
        return h

    def part_holder(self, sym: Symbol, key: str, name: str, ty) -> int:
        if key in self.holders:
            return self.holders[key]
        base = self.holders[f"sym:{sym.sid}"]
        h = self.node(self.base_kind(sym, ty), name, name, key, type_str(ty) if ty else "",
                      sym=sym.fingerprint)
        self.holders[key] = h
        self.own(h, base)
        return h

    def fnconst(self, fsid: int) -> int:
        key = f"fnconst:{fsid}"
        if key not in self.holders:
            f = self.t[fsid]
            h = self.node(HolderKind.CONSTANT, f.name, f"{f.name}_addr", key, "address",
                          sym=f.fingerprint)
            self.holders[key] = h
            self.own(h, self.module)
        return self.holders[key]

    def lv_holder(self, e) -> int:
        sym = self.t.use(e)
        if isinstance(e, A.Index):
            if isinstance(e.index, A.IntLit):
                elem = sym.type.elem if isinstance(sym.type, A.ArrayType) else None
                return self.part_holder(sym, f"elem:{sym.sid}:{e.index.value}",
                                        f"{e.name}[{e.index.value}]", elem)
            return self.holders[f"sym:{sym.sid}"]
        if isinstance(e, A.Field):
            fty = None
            if isinstance(sym.type, A.TypeName) and sym.type.name in self.t.records:
                fty = dict((n, t) for t, n in self.t.records[sym.type.name].fields).get(e.field)
            return self.part_holder(sym, f"field:{sym.sid}:{e.field}", f"{e.name}.{e.field}", fty)
        return self.holders[f"sym:{sym.sid}"]

    def reads(self, e, results: dict[int, int]) -> list[int]:
        out: list[int] = []

        def go(x):
            if isinstance(x, A.Name):
                sym = self.t.use(x)
                out.append(self.fnconst(sym.sid) if sym.kind == "func" else self.lv_holder(x))
            elif isinstance(x, A.Index):
                go(x.index)
                out.append(self.lv_holder(x))
            elif isinstance(x, A.Field):
                out.append(self.lv_holder(x))
            elif isinstance(x, A.BinOp):
                go(x.left)
                go(x.right)
            elif isinstance(x, A.Call):
                if x.nid in results:
                    out.append(results[x.nid])

        if e is not None:
            go(e)
        return list(dict.fromkeys(out))

    # program ---------------------------------------------------------------------------

    def run(self) -> Diagram:
        o = self.o
        self.module = self.node(
            NodeKind.MODULE, o.module_name, o.module_name, "module",
            f"symtab:{self.t.fingerprint()}", granularity=o.granularity,
            call_style=o.call_style, straight_line=is_straight_line(self.p),
        )
        for item in self.p.items:
            if isinstance(item, A.RecordDecl):
                r = self.node(NodeKind.MODULE, f"record {item.name}", f"rec_{item.name}",
                              f"rec:{item.name}")
                self.holders[f"rec:{item.name}"] = r
                self.decl_node[item.nid] = r
                self.own(r, self.module)
        for f in self.t.functions():
            self.declare_function(f)
        for item in self.p.items:
            if isinstance(item, A.VarDecl):
                self.global_var(item)
            elif isinstance(item, (A.FuncDecl, A.Block)):
                sid = self.t.decls[item.nid]
                self.own(self.fn_proc[sid], self.module)
                self.body(sid)
        self.resolve_deferred()
        self.comments()
        if o.alias_threshold is not None:
            self.alias(o.alias_threshold)
        return self.d

    def declare_function(self, f: Symbol) -> None:
        body = self.t.bodies[f.sid]
        if isinstance(body, A.FuncDecl):
            name, hint = signature(body), body.name
        else:
            name, hint = f.name, f.name.strip("{}")
        proc = self.node(NodeKind.PROCESS, name, hint, f"fn:{f.sid}", origin=f.decl_nid,
                         fn=f.fingerprint)
        self.fn_proc[f.sid] = proc
        self.decl_node[f.decl_nid] = proc
        params = body.params if isinstance(body, A.FuncDecl) else []
        self.params[f.sid] = [self.var_holder(self.t.decl(p), proc) for p in params]
        if isinstance(body, A.FuncDecl) and body.ret != A.TypeName("void"):
            r = self.node(HolderKind.STACK, "ret", f"ret_{body.name}", f"ret:{f.sid}",
                          type_str(body.ret), sym=f"ret:{f.fingerprint}")
            self.holders[f"ret:{f.sid}"] = r
            self.ret[f.sid] = r
            self.own(r, proc)

    def global_var(self, v: A.VarDecl) -> None:
        h = self.var_holder(self.t.decl(v), self.module)
        if v.init is not None and _is_transfer(v.init, self.t):
            self.address_flow(v, h, v.init)
            return
        for r in self.reads(v.init, {}):
            self.edge(EdgeKind.DATA_READ, r, self.module, {v.nid})
        self.edge(EdgeKind.DATA_UPDATE, self.module, h, {v.nid})
        self.address_ref(h, v.init)

    def body(self, sid: int) -> None:
        proc = self.fn_proc[sid]
        body = self.t.bodies[sid]
        block = body.body if isinstance(body, A.FuncDecl) else body
        tl = self.timeline(proc, func=sid, block=block.nid)
        self.stmts(block.stmts, _Ctx(fn=sid, tl=tl, owner=proc))

    # statements --------------------------------------------------------------------------

    def keeps(self, s) -> bool:
        g = self.o.granularity
        if g == "function":
            return False
        if g == "block":
            return isinstance(s, _BLOCK_LEVEL)
        return True

    def proc_for(self, s, ctx: _Ctx, kind=NodeKind.PROCESS, hint: Optional[str] = None) -> int:
        if not self.keeps(s):
            return ctx.owner
        n = self.node(kind, stmt_label(s), hint or f"s{s.nid}", f"stmt:{s.nid}", origin=s.nid)
        self.dispatch(ctx.tl, n, s.nid)
        return n

    def sub_block(self, b: A.Block, ctx: _Ctx, name: str, hint: str, parent_tl: int,
                  **ctx_changes) -> None:
        """A nested block as its own process on ``parent_tl``, or inline at function level."""
        if self.o.granularity == "function":
            self.stmts(b.stmts, replace(ctx, **ctx_changes))
            return
        proc = self.node(NodeKind.PROCESS, name, hint, f"block:{b.nid}", origin=b.nid)
        self.dispatch(parent_tl, proc, b.nid)
        tl = self.timeline(proc, func=ctx.fn, block=b.nid)
        self.stmts(b.stmts, replace(ctx, tl=tl, owner=proc, **ctx_changes))

    def stmts(self, stmts: list, ctx: _Ctx) -> None:
        for s in stmts:
            self.stmt(s, ctx)

    def stmt(self, s, ctx: _Ctx) -> None:
        function_level = self.o.granularity == "function"
        if isinstance(s, A.VarDecl):
            h = self.var_holder(self.t.decl(s), ctx.owner)
            if s.init is not None and _is_transfer(s.init, self.t):
                self.transfer(s, h, s.init, ctx)
            else:
                self.plain_write(s, h, s.init, [], ctx)
        elif isinstance(s, A.HeapAlloc):
            h = self.var_holder(self.t.decl(s), ctx.owner)
            p = self.proc_for(s, ctx)
            self.edge(EdgeKind.CREATE, p, h, {s.nid})
        elif isinstance(s, A.Delete):
            h = self.holders[f"sym:{self.t.use(s).sid}"]
            p = self.proc_for(s, ctx)
            self.edge(EdgeKind.DESTROY, p, h, {s.nid})
        elif isinstance(s, A.Assign):
            h = self.lv_holder(s.target)
            extra = [s.target.index] if isinstance(s.target, A.Index) else []
            if _is_transfer(s.value, self.t) and not extra:
                self.transfer(s, h, s.value, ctx)
            else:
                self.plain_write(s, h, s.value, extra, ctx)
        elif isinstance(s, A.CallStmt):
            self.calls([s.call], ctx, no_tmp={s.call.nid})
        elif isinstance(s, A.Return):
            results = self.calls([s.value], ctx)
            p = self.proc_for(s, ctx)
            for r in self.reads(s.value, results):
                self.edge(EdgeKind.DATA_READ, r, p, {s.nid})
            if s.value is not None and ctx.fn in self.ret:
                self.edge(EdgeKind.DATA_UPDATE, p, self.ret[ctx.fn], {s.nid})
        elif isinstance(s, (A.If, A.While)):
            self.branch(s, ctx)
        elif isinstance(s, A.Block):
            self.sub_block(s, ctx, "{ }", f"b{s.nid}", ctx.tl)
        elif isinstance(s, A.FuncDecl):
            sid = self.t.decls[s.nid]
            self.own(self.fn_proc[sid], ctx.owner)
            self.body(sid)
        elif isinstance(s, A.Label):
            if not function_level:
                label = self.proc_for(s, ctx, hint=f"L_{s.name}")
                self.d.nodes[label].attrs["sym"] = self.t.decl(s).fingerprint
                self.label_node[self.t.decls[s.nid]] = label
        elif isinstance(s, A.Goto):
            if not function_level:
                p = self.proc_for(s, ctx)
                self.deferred.append((p, s.nid, ("label", self.t.uses[s.nid])))
        elif isinstance(s, A.Break):
            if not function_level:
                p = self.proc_for(s, ctx)
                parent_tl, dec, _ = ctx.loop
                self.deferred.append((p, s.nid, ("after", parent_tl, dec)))
        elif isinstance(s, A.Continue):
            if not function_level:
                p = self.proc_for(s, ctx)
                self.deferred.append((p, s.nid, ("start", ctx.loop[2])))
        elif isinstance(s, A.Try):
            self.try_(s, ctx)
        elif isinstance(s, A.Throw):
            results = self.calls([s.value], ctx)
            p = self.proc_for(s, ctx)
            for r in self.reads(s.value, results):
                self.edge(EdgeKind.DATA_READ, r, p, {s.nid})
            if not function_level and ctx.handler is not None:
                self.deferred.append((p, s.nid, ("start", ctx.handler)))
        elif isinstance(s, A.Spawn):
            results = self.calls(s.call.args, ctx)
            p = self.proc_for(s, ctx)
            self.call(s.call, ctx, results, want_tmp=False, spawned_by=(p, s.nid))
        else:  # pragma: no cover
            raise TypeError(s)

    def plain_write(self, s, h: int, value, extra: list, ctx: _Ctx) -> None:
        results = self.calls([value] + extra, ctx)
        p = self.proc_for(s, ctx)
        srcs = self.reads(value, results)
        for x in extra:
            srcs += [r for r in self.reads(x, results) if r not in srcs]
        for r in srcs:
            self.edge(EdgeKind.DATA_READ, r, p, {s.nid})
        self.edge(EdgeKind.DATA_UPDATE, p, h, {s.nid})
        self.address_ref(h, value)

    def address_ref(self, h: int, value) -> None:
        if isinstance(value, A.AddrOf) and self.d.nodes[h].holder is HolderKind.ADDRESS:
            self.edge(EdgeKind.REF, h, self.holders[f"sym:{self.t.use(value).sid}"])

    def address_flow(self, s, h: int, value) -> None:
        """``x = func`` / ``x = &func``: the function's constant address flows into x."""
        c = self.fnconst(self.t.use(value).sid)
        self.edge(EdgeKind.DATA_FLOW, c, h, {s.nid})
        if self.d.nodes[h].holder is HolderKind.ADDRESS:
            self.edge(EdgeKind.REF, h, c)

    def transfer(self, s, h: int, value, ctx: _Ctx) -> None:
        if not isinstance(value, A.Call):
            self.address_flow(s, h, value)
            return
        self.calls([value], ctx, no_tmp={value.nid})
        src = self.result_source(value)
        if src is not None:
            self.edge(EdgeKind.DATA_FLOW, src, h, {s.nid, value.nid})

    def result_source(self, c: A.Call) -> Optional[int]:
        fsid = self.callee_sid(c)
        if fsid is None:
            return self.holders.get(f"unres:{c.nid}")
        return self.ret.get(fsid)

    def branch(self, s, ctx: _Ctx) -> None:
        results = self.calls([s.cond], ctx)
        if self.o.granularity == "function":
            for r in self.reads(s.cond, results):
                self.edge(EdgeKind.DATA_READ, r, ctx.owner, {s.nid})
            arms = [s.then, s.else_] if isinstance(s, A.If) else [s.body]
            for b in arms:
                if b is not None:
                    self.stmts(b.stmts, ctx)
            return
        dec = self.proc_for(s, ctx, kind=NodeKind.DECISION, hint=f"d{s.nid}")
        for r in self.reads(s.cond, results):
            self.edge(EdgeKind.DATA_READ, r, dec, {s.nid})
        if isinstance(s, A.If):
            for b, role in ((s.then, "then"), (s.else_, "else")):
                if b is not None:
                    arm_tl = self.timeline(dec, func=ctx.fn, role=role)
                    self.sub_block(b, ctx, role, f"{role}{b.nid}", arm_tl)
        else:
            loop_tl = self.timeline(dec, func=ctx.fn, role="loop")
            self.sub_block(s.body, ctx, "loop body", f"body{s.body.nid}", loop_tl,
                           loop=(ctx.tl, dec, loop_tl))

    def try_(self, s: A.Try, ctx: _Ctx) -> None:
        e = self.t.decl(s)
        if self.o.granularity == "function":
            self.stmts(s.body.stmts, ctx)
            h = self.var_holder(e, ctx.owner)
            self.edge(EdgeKind.DATA_UPDATE, ctx.owner, h, {s.nid})
            self.stmts(s.handler.stmts, ctx)
            return
        tp = self.node(NodeKind.PROCESS, "try", f"try{s.nid}", f"block:{s.body.nid}",
                       origin=s.body.nid)
        self.dispatch(ctx.tl, tp, s.body.nid)
        cp = self.node(NodeKind.PROCESS, f"catch ({s.var})", f"catch{s.nid}", f"catch:{s.nid}",
                       origin=s.nid)
        self.edge(EdgeKind.EXCEPTION, tp, cp, {s.nid})
        body_tl = self.timeline(tp, func=ctx.fn, block=s.body.nid)
        handler_tl = self.timeline(cp, func=ctx.fn, block=s.handler.nid)
        self.stmts(s.body.stmts, replace(ctx, tl=body_tl, owner=tp, handler=handler_tl))
        h = self.var_holder(e, cp)
        self.edge(EdgeKind.DATA_UPDATE, cp, h, {s.nid})
        self.stmts(s.handler.stmts, replace(ctx, tl=handler_tl, owner=cp))

    # calls ------------------------------------------------------------------------------

    def callee_sid(self, c: A.Call) -> Optional[int]:
        sym = self.t.use(c)
        if not c.indirect:
            return sym.sid
        return self.pt.resolve(sym.sid)

    def callee_proc(self, c: A.Call, ctx: _Ctx) -> int:
        fsid = self.callee_sid(c)
        if fsid is not None:
            return self.fn_proc[fsid]
        key = f"unres:{c.nid}"
        if key not in self.holders:
            self.unresolved.append((c.span, c.callee))
            self.holders[key] = self.node(NodeKind.PROCESS, f"?({c.callee})", f"unres{c.nid}",
                                          key, origin=c.nid)
        return self.holders[key]

    def calls(self, exprs: list, ctx: _Ctx, no_tmp: frozenset = frozenset()) -> dict[int, int]:
        """Dispatch every call in ``exprs`` in evaluation order; returns call nid -> tmp holder."""
        results: dict[int, int] = {}
        for e in exprs:
            for c in A.expr_calls(e):
                self.call(c, ctx, results, want_tmp=c.nid not in no_tmp)
        return results

    def call(self, c: A.Call, ctx: _Ctx, results: dict[int, int], want_tmp: bool,
             spawned_by: Optional[tuple[int, int]] = None) -> None:
        target = self.callee_proc(c, ctx)
        if spawned_by is None:
            self.dispatch(ctx.tl, target, c.nid)
        else:
            src, spawn_nid = spawned_by
            self.threads += 1
            root = self.timeline(None, root_label=f"thread {self.threads}", spawn=spawn_nid,
                                 func=ctx.fn)
            self.dispatch(root, target, c.nid)
            self.edge(EdgeKind.CONTROL_PAR, src, target, {spawn_nid})
        fsid = self.callee_sid(c)
        if fsid is None:
            return
        for i, (param, arg) in enumerate(zip(self.params[fsid], c.args)):
            srcs = self.reads(arg, results)
            if not srcs:
                key = f"const:{arg.nid}"
                srcs = [self.node(HolderKind.CONSTANT, expr_str(arg), f"k{arg.nid}", key)]
                self.own(srcs[0], ctx.owner)
            if self.o.call_style == "simplified":
                for r in srcs:
                    self.edge(EdgeKind.DATA_FLOW, r, param, {c.nid})
            else:
                cp = self.node(NodeKind.PROCESS, f"copy {expr_str(arg)}", f"copy{c.nid}_{i}",
                               f"copy:{c.nid}:{i}")
                for r in srcs:
                    self.edge(EdgeKind.DATA_READ, r, cp, {c.nid})
                self.edge(EdgeKind.DATA_UPDATE, cp, param, {c.nid})
        if want_tmp and fsid in self.ret:
            self.tmps += 1
            tmp = self.node(HolderKind.STACK, f"tmp{self.tmps}", f"tmp{self.tmps}", f"tmp:{c.nid}")
            self.own(tmp, ctx.owner)
            self.edge(EdgeKind.DATA_FLOW, self.ret[fsid], tmp, {c.nid})
            results[c.nid] = tmp

    # finishing passes -------------------------------------------------------------------

    def resolve_deferred(self) -> None:
        for src, origin, spec in self.deferred:
            if spec[0] == "label":
                tl, rank = self.pos[self.label_node[spec[1]]]
            elif spec[0] == "after":
                tl = spec[1]
                rank = self.pos[spec[2]][1] + 1
            else:
                tl, rank = spec[1], 1
            if rank > self.last_rank[tl]:
                timeline = self.d.timelines[tl]
                timeline.markers = timeline.markers | {"done"}
            self.edge(EdgeKind.CONTROL_RETURN, src, TimelinePos(tl, rank), {origin})

    def comments(self) -> None:
        decls: dict[int, list[tuple[int, int]]] = {}
        top_blocks = {i.nid for i in self.p.items if isinstance(i, A.Block)}
        for node in A.walk(self.p):
            declares = isinstance(node, (A.FuncDecl, A.VarDecl, A.HeapAlloc, A.RecordDecl))
            if (declares or node.nid in top_blocks) and node.nid in self.decl_node:
                decls.setdefault(node.span.line, []).append((node.span.column, node.nid))
        pending: list = []
        last_line = None
        for tok in self.p.comments:
            line = tok.span.line
            text = tok.text[2:].strip()
            trailing = [nid for col, nid in sorted(decls.get(line, [])) if col < tok.span.column]
            if trailing:
                self.attach_comment([text], trailing[0], line)
                continue
            if pending and last_line is not None and line != last_line + 1:
                pending = []
            pending.append(text)
            last_line = line
            following = sorted(decls.get(line + 1, []))
            if following:
                self.attach_comment(pending, following[0][1], line)
                pending = []

    def attach_comment(self, lines: list[str], decl_nid: int, line: int) -> None:
        note = self.node(NodeKind.COMMENT, "", f"note{line}", f"comment:{line}", "\n".join(lines))
        self.edge(EdgeKind.COMMENT_ATTACH, note, self.decl_node[decl_nid])

    def alias(self, threshold: int) -> None:
        for fsid, proc in sorted(self.fn_proc.items()):
            sites = [d for tl in sorted(self.d.timelines) for d in self.d.timelines[tl].dispatches
                     if d.target == proc]
            if len(sites) < threshold:
                continue
            name = self.d.nodes[proc].name
            hint = self.d.nodes[proc].ident
            for k, site in enumerate(sites[1:], start=2):
                copy = self.node(NodeKind.PROCESS, name, f"{hint}_alias", f"alias:{fsid}:{k}",
                                 alias_of=proc)
                site.target = copy
                self.edge(EdgeKind.ALIAS, copy, proc, count=len(sites))


def _stats(d: Diagram) -> dict:
    nodes = Counter(n.holder.value if n.holder else n.kind.value for n in d.nodes.values())
    edges = Counter(e.kind.value for e in d.edges.values())
    return {
        "nodes": dict(sorted(nodes.items())),
        "edges": dict(sorted(edges.items())),
        "timelines": len(d.timelines),
        "dispatches": sum(len(t.dispatches) for t in d.timelines.values()),
    }


def resolve_entry(program: A.Program, table: SymbolTable, entry: Optional[str]) -> Symbol:
    name = entry or default_entry(program, table)
    sym = table.function_named(name) if name else None
    if sym is None:
        raise ExtractError(f"unknown entry function {name!r}" if name else "program has no entry")
    return sym


def extract(program: A.Program, table: SymbolTable,
            options: ExtractOptions = ExtractOptions()) -> ExtractReport:
    entry = resolve_entry(program, table, options.entry)
    ex = _Extractor(program, table, options)
    d = ex.run()
    d.nodes[ex.module].attrs["entry"] = entry.sid
    return ExtractReport(d, _stats(d), ex.unresolved)


def function_node(d: Diagram, table: SymbolTable, name: str) -> int:
    sym = table.function_named(name)
    if sym is not None:
        for n in d.nodes.values():
            if n.attrs.get("key") == f"fn:{sym.sid}":
                return n.id
    n = d.node_by_ident(name)
    if n is not None and n.is_process_like:
        return n.id
    raise ExtractError(f"unknown process {name!r}")


def extract_compact(program: A.Program, table: SymbolTable, options: ExtractOptions,
                    process: str) -> Diagram:
    """The compact input/output view of one function."""
    d = extract(program, table, options).diagram
    return contract(d, function_node(d, table, process))
