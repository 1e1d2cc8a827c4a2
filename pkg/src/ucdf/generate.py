"""Seeded generators for property tests: random diagrams and random Flow-C programs.

Generated programs always terminate: functions only call functions defined
before them, loops count a private variable up to a small bound, and gotos
jump forward.  Function pointers are assigned exactly once, so every
indirect call has a unique target.
"""

from __future__ import annotations

import random
import string

from .core import Diagram, EdgeKind, EdgeRef, HolderKind, NodeKind, NodeRef, TimelinePos
from .core.model import MARKERS
from .text import RESERVED

_TEXT_CHARS = string.ascii_letters + string.digits + ' _-+*/:;.,()[]<>!?"\\\n' + "äé★"


def _text(rng: random.Random, limit: int = 12) -> str:
    if rng.random() < 0.3:
        return ""
    return "".join(rng.choice(_TEXT_CHARS) for _ in range(rng.randint(1, limit)))


def _ident(rng: random.Random, taken: set[str]) -> str | None:
    if rng.random() < 0.4:
        return None
    while True:
        first = rng.choice(string.ascii_letters + "_")
        rest = "".join(rng.choice(string.ascii_letters + string.digits + "_")
                       for _ in range(rng.randint(0, 6)))
        name = first + rest
        # n<k>/t<k> are the default idents; avoid colliding with them
        if name not in RESERVED and name not in taken and not (
                name[0] in "nt" and name[1:].isdigit()):
            taken.add(name)
            return name


def random_diagram(rng: random.Random, max_nodes: int = 12) -> Diagram:
    """Any structurally well-formed diagram; rule violations are allowed."""
    d = Diagram()
    taken: set[str] = set()
    for _ in range(rng.randint(0, max_nodes)):
        if rng.random() < 0.45:
            hk = rng.choice(list(HolderKind))
            as_proc = hk is HolderKind.DOCUMENT and rng.random() < 0.5
            d.add_node(hk, _text(rng), _text(rng), as_process=as_proc, ident=_ident(rng, taken))
        else:
            kind = rng.choice([k for k in NodeKind if k is not NodeKind.HOLDER])
            d.add_node(kind, _text(rng), _text(rng), ident=_ident(rng, taken))
    nodes = sorted(d.nodes)
    procs = [n for n in nodes if d.nodes[n].is_process_like]
    for _ in range(rng.randint(0, 3) if nodes else 0):
        owner = None if rng.random() < 0.3 or not procs else rng.choice(procs)
        markers = [m for m in MARKERS if rng.random() < 0.3]
        tid = d.add_timeline(owner, markers, root_label=_text(rng) if owner is None else "",
                             ident=_ident(rng, taken))
        rank = 0
        for _ in range(rng.randint(0, 4)):
            rank += rng.randint(1, 3)
            label = None if rng.random() < 0.7 else (_text(rng) or "x")
            d.append_dispatch(tid, rank, rng.choice(nodes), label)
    for child in nodes:
        if rng.random() < 0.15:
            parents = [p for p in nodes if p < child]
            if parents:
                d.set_container(child, rng.choice(parents))
    timelines = sorted(d.timelines)

    def endpoint(allow_edge: bool):
        # sources are always nodes; only targets may be timeline positions or edges
        r = rng.random()
        if not allow_edge:
            return NodeRef(rng.choice(nodes))
        if timelines and r < 0.15:
            t = d.timelines[rng.choice(timelines)]
            return TimelinePos(t.id, rng.randint(1, t.end_rank))
        if d.edges and r < 0.25:
            return EdgeRef(rng.choice(sorted(d.edges)))
        return NodeRef(rng.choice(nodes))

    for _ in range(rng.randint(0, 2 * len(nodes)) if nodes else 0):
        kind = rng.choice(list(EdgeKind))
        count = rng.randint(2, 5) if kind is EdgeKind.ALIAS and rng.random() < 0.5 else 1
        d.add_edge(kind, endpoint(False), endpoint(True), count)
    for key in [("head",), ("end",)] + [("node", n) for n in nodes]:
        if rng.random() < 0.1:
            d.remarks[key] = ["".join(rng.choice(string.ascii_letters + " ") for _ in range(8)).strip()
                              or "note"]
    return d


class _ProgramGen:
    def __init__(self, rng: random.Random, branchy: bool) -> None:
        self.rng = rng
        self.branchy = branchy
        self.lines: list[str] = []
        self.funcs: list[tuple[str, int, bool]] = []  # name, arity, returns int
        self.throwing: list[tuple[str, int]] = []
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def expr(self, scope: list[str], depth: int = 0) -> str:
        rng = self.rng
        r = rng.random()
        pure = [f for f in self.funcs if f[2]]
        if depth < 2 and pure and r < 0.2:
            name, arity, _ = rng.choice(pure)
            return f"{name}({', '.join(self.expr(scope, depth + 1) for _ in range(arity))})"
        if depth < 2 and r < 0.45:
            return f"{self.expr(scope, depth + 1)} {rng.choice('+-')} {self.expr(scope, depth + 1)}"
        if scope and r < 0.85:
            return rng.choice(scope)
        return str(rng.randint(0, 9))

    def cond(self, scope: list[str]) -> str:
        return f"{self.expr(scope, 1)} {self.rng.choice(['<', '=='])} {self.expr(scope, 1)}"

    def call(self, scope: list[str]) -> str | None:
        if not self.funcs:
            return None
        name, arity, _ = self.rng.choice(self.funcs)
        return f"{name}({', '.join(self.expr(scope, 1) for _ in range(arity))})"

    def block(self, scope: list[str], pad: str, budget: int, loop: bool, out: list[str]) -> None:
        rng = self.rng
        scope = list(scope)
        labels: list[str] = []
        for _ in range(budget):
            r = rng.random()
            if r < 0.25:
                v = self.fresh("v")
                out.append(f"{pad}int {v} = {self.expr(scope)};")
                scope.append(v)
            elif r < 0.45 and scope:
                out.append(f"{pad}{rng.choice(scope)} = {self.expr(scope)};")
            elif r < 0.6:
                c = self.call(scope)
                if c:
                    out.append(f"{pad}{c};")
            elif r < 0.65 and self.funcs and not self.branchy:
                name, arity, _ = rng.choice(self.funcs)
                fp = self.fresh("fp")
                params = ", ".join(["int"] * arity)
                args = ", ".join(self.expr(scope, 1) for _ in range(arity))
                out += [f"{pad}fn({params}) {fp};", f"{pad}{fp} = {name};", f"{pad}(*{fp})({args});"]
            elif r < 0.7:
                h = self.fresh("h")
                out += [f"{pad}{h} = new int;", f"{pad}{h} = {self.expr(scope)};"]
                if scope:
                    out.append(f"{pad}{rng.choice(scope)} = {h} + 1;")
                out.append(f"{pad}delete {h};")
            elif not self.branchy:
                continue
            elif r < 0.78:
                out.append(f"{pad}if ({self.cond(scope)})")
                out.append(f"{pad}{{")
                self.block(scope, pad + "    ", rng.randint(1, 3), loop, out)
                out.append(f"{pad}}}")
                if rng.random() < 0.5:
                    out += [f"{pad}else", f"{pad}{{"]
                    self.block(scope, pad + "    ", rng.randint(1, 3), loop, out)
                    out.append(f"{pad}}}")
            elif r < 0.85:
                i = self.fresh("i")
                out += [f"{pad}int {i} = 0;", f"{pad}while ({i} < {rng.randint(1, 4)})", f"{pad}{{",
                        f"{pad}    {i} = {i} + 1;"]
                self.block(scope, pad + "    ", rng.randint(1, 3), True, out)
                out.append(f"{pad}}}")
            elif r < 0.9 and loop:
                kw = rng.choice(["break", "continue"])
                out += [f"{pad}if ({self.cond(scope)})", f"{pad}{{", f"{pad}    {kw};", f"{pad}}}"]
            elif r < 0.95:
                label = self.fresh("L")
                labels.append((label, list(scope)))
                out += [f"{pad}if ({self.cond(scope)})", f"{pad}{{", f"{pad}    goto {label};", f"{pad}}}"]
            elif self.throwing:
                name, arity = rng.choice(self.throwing)
                e = self.fresh("e")
                args = ", ".join(self.expr(scope, 1) for _ in range(arity))
                target = rng.choice(scope) if scope else None
                out += [f"{pad}try", f"{pad}{{"]
                out.append(f"{pad}    {target} = {name}({args});" if target else
                           f"{pad}    {name}({args});")
                out += [f"{pad}}}", f"{pad}catch ({e})", f"{pad}{{"]
                out.append(f"{pad}    {target} = {e};" if target else f"{pad}    int {self.fresh('c')} = {e};")
                out.append(f"{pad}}}")
        # a jump to the first label skips every later declaration
        seen = labels[0][1] if labels else []
        for label, _ in labels:
            out.append(f"{pad}{label}:")
            if seen:
                out.append(f"{pad}{rng.choice(seen)} = {self.expr(seen, 1)};")
            else:
                out.append(f"{pad}int {self.fresh('v')} = 0;")

    def function(self, name: str, arity: int, returns: bool, throws: bool = False) -> None:
        params = [self.fresh("p") for _ in range(arity)]
        sig = ", ".join(f"int {p}" for p in params)
        out = [f"{'int' if returns else 'void'} {name}({sig})", "{"]
        if throws:
            out += [f"    if ({params[0]} < {self.rng.randint(0, 6)})", "    {",
                    f"        throw {params[0]};", "    }"]
        self.block(params + self.globals, "    ", self.rng.randint(1, 5), False, out)
        if returns:
            out.append(f"    return {self.expr(params + self.globals)};")
        out.append("}")
        self.lines += out + [""]

    def program(self) -> str:
        rng = self.rng
        self.globals = [f"g{k}" for k in range(rng.randint(0, 2))]
        for g in self.globals:
            self.lines.append(f"{'static ' if rng.random() < 0.5 else ''}int {g} = {rng.randint(0, 9)};")
        if self.globals:
            self.lines.append("")
        if self.branchy and rng.random() < 0.5:
            name = self.fresh("t")
            self.function(name, 1, True, throws=True)
            self.throwing.append((name, 1))
        for _ in range(rng.randint(0, 3)):
            name = self.fresh("f")
            arity = rng.randint(0, 2)
            returns = rng.random() < 0.6
            self.function(name, arity, returns)
            self.funcs.append((name, arity, returns))
        out = ["void main()", "{"]
        self.block(list(self.globals), "    ", rng.randint(2, 6), False, out)
        if self.funcs and rng.random() < 0.3:
            voids = [f for f in self.funcs if not f[2]]
            if voids:
                name, arity, _ = rng.choice(voids)
                args = ", ".join(str(rng.randint(0, 9)) for _ in range(arity))
                out.append(f"    spawn {name}({args});")
        out.append("}")
        self.lines += out
        return "\n".join(self.lines) + "\n"


def random_program(rng: random.Random, branchy: bool = False) -> str:
    """Flow-C source; straight-line unless ``branchy``."""
    return _ProgramGen(rng, branchy).program()
