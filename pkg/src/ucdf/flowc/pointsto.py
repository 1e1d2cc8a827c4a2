"""Flow-insensitive function-address analysis for indirect calls.

Each variable collects the set of functions whose address can reach it
through assignments, initializers and argument passing.  A variable that
also receives a value of unknown origin (a call result, arithmetic, a
caught exception) is tainted and never resolves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .symbols import SymbolTable


@dataclass
class PointsTo:
    targets: dict[int, set[int]] = field(default_factory=dict)
    tainted: set[int] = field(default_factory=set)

    def resolve(self, sid: int) -> Optional[int]:
        """The unique function sid ``sid`` can hold, or None."""
        if sid in self.tainted:
            return None
        ts = self.targets.get(sid, set())
        return next(iter(ts)) if len(ts) == 1 else None


def _source(e, table: SymbolTable):
    if isinstance(e, (A.Name, A.AddrOf)):
        sym = table.use(e)
        if sym.kind == "func":
            return ("fn", sym.sid)
        if isinstance(e, A.Name):
            return ("var", sym.sid)
    elif isinstance(e, (A.Index, A.Field)):
        return ("var", table.use(e).sid)
    return ("taint",)


def analyze(program: A.Program, table: SymbolTable) -> PointsTo:
    flows: list[tuple[int, tuple]] = []
    calls: list[A.Call] = []
    for node in A.walk(program):
        if isinstance(node, A.Assign):
            flows.append((table.use(node.target).sid, _source(node.value, table)))
        elif isinstance(node, A.VarDecl) and node.init is not None:
            flows.append((table.decl(node).sid, _source(node.init, table)))
        elif isinstance(node, A.Try):
            flows.append((table.decl(node).sid, ("taint",)))
        elif isinstance(node, A.Call):
            calls.append(node)

    pt = PointsTo()
    for c in calls:
        if not c.indirect:
            f = table.use(c)
            fn = table.bodies[f.sid]
            for p, a in zip(fn.params, c.args):
                flows.append((table.decl(p).sid, _source(a, table)))

    changed = True
    resolved_args: set[tuple[int, int]] = set()
    while changed:
        changed = False
        for dst, src in flows:
            if src[0] == "taint":
                new, taint = set(), True
            elif src[0] == "fn":
                new, taint = {src[1]}, False
            else:
                new, taint = pt.targets.get(src[1], set()), src[1] in pt.tainted
            cur = pt.targets.setdefault(dst, set())
            if not new <= cur:
                cur |= new
                changed = True
            if taint and dst not in pt.tainted:
                pt.tainted.add(dst)
                changed = True
        # arguments of indirect calls flow into every possible callee
        for c in calls:
            if not c.indirect:
                continue
            for f in sorted(pt.targets.get(table.use(c).sid, ())):
                if (c.nid, f) in resolved_args:
                    continue
                resolved_args.add((c.nid, f))
                fn = table.bodies[f]
                params = fn.params if isinstance(fn, A.FuncDecl) else []
                for p, a in zip(params, c.args):
                    flows.append((table.decl(p).sid, _source(a, table)))
                changed = True
    return pt
