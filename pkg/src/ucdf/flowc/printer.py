"""Pretty-printer for Flow-C trees.

Also produces the one-line labels used for statement process boxes.
"""

from __future__ import annotations

from . import ast as A


def type_str(t: A.Type) -> str:
    if isinstance(t, A.TypeName):
        return t.name
    if isinstance(t, A.ArrayType):
        return f"{type_str(t.elem)}[{t.size}]"
    if isinstance(t, A.PtrType):
        return f"{type_str(t.elem)}*"
    return "fn(" + ", ".join(type_str(p) for p in t.params) + ")"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def expr_str(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.StrLit):
        return _quote(e.value)
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.Index):
        return f"{e.name}[{expr_str(e.index)}]"
    if isinstance(e, A.Field):
        return f"{e.name}.{e.field}"
    if isinstance(e, A.AddrOf):
        return f"&{e.name}"
    if isinstance(e, A.Call):
        head = f"(*{e.callee})" if e.indirect else e.callee
        return head + "(" + ", ".join(expr_str(a) for a in e.args) + ")"
    if isinstance(e, A.BinOp):
        right = expr_str(e.right)
        if isinstance(e.right, A.BinOp):
            right = f"({right})"
        return f"{expr_str(e.left)} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def signature(f: A.FuncDecl) -> str:
    params = ", ".join(f"{type_str(p.type)} {p.name}" for p in f.params)
    return f"{type_str(f.ret)} {f.name}({params})"


def stmt_label(s) -> str:
    """Single-line text for a statement's process box (no trailing ';')."""
    if isinstance(s, A.VarDecl):
        head = ("static " if s.static else "") + f"{type_str(s.type)} {s.name}"
        if s.init is None:
            return head
        if s.paren_init:
            return f"{head}({expr_str(s.init)})"
        return f"{head} = {expr_str(s.init)}"
    if isinstance(s, A.HeapAlloc):
        return f"{s.name} = new {type_str(s.type)}"
    if isinstance(s, A.Delete):
        return f"delete {s.name}"
    if isinstance(s, A.Assign):
        return f"{expr_str(s.target)} = {expr_str(s.value)}"
    if isinstance(s, A.CallStmt):
        return expr_str(s.call)
    if isinstance(s, A.Return):
        return "return" if s.value is None else f"return {expr_str(s.value)}"
    if isinstance(s, A.If):
        return f"if ({expr_str(s.cond)})"
    if isinstance(s, A.While):
        return f"while ({expr_str(s.cond)})"
    if isinstance(s, A.Goto):
        return f"goto {s.label}"
    if isinstance(s, A.Label):
        return f"{s.name}:"
    if isinstance(s, A.Break):
        return "break"
    if isinstance(s, A.Continue):
        return "continue"
    if isinstance(s, A.Try):
        return "try"
    if isinstance(s, A.Throw):
        return f"throw {expr_str(s.value)}"
    if isinstance(s, A.Spawn):
        return f"spawn {expr_str(s.call)}"
    if isinstance(s, A.Block):
        return "{ }"
    if isinstance(s, A.FuncDecl):
        return signature(s)
    raise TypeError(f"not a statement: {s!r}")


def _block(b: A.Block, depth: int) -> list[str]:
    pad = "    " * depth
    lines = [pad + "{"]
    for s in b.stmts:
        lines += _stmt(s, depth + 1)
    lines.append(pad + "}")
    return lines


def _stmt(s, depth: int) -> list[str]:
    pad = "    " * depth
    if isinstance(s, A.Block):
        return _block(s, depth)
    if isinstance(s, A.FuncDecl):
        return [pad + signature(s)] + _block(s.body, depth)
    if isinstance(s, A.If):
        out = [pad + stmt_label(s)] + _block(s.then, depth)
        if s.else_ is not None:
            out += [pad + "else"] + _block(s.else_, depth)
        return out
    if isinstance(s, A.While):
        return [pad + stmt_label(s)] + _block(s.body, depth)
    if isinstance(s, A.Try):
        return ([pad + "try"] + _block(s.body, depth) + [pad + f"catch ({s.var})"]
                + _block(s.handler, depth))
    if isinstance(s, A.Label):
        return [pad + stmt_label(s)]
    return [pad + stmt_label(s) + ";"]


def print_program(p: A.Program) -> str:
    lines: list[str] = []
    for item in p.items:
        if isinstance(item, A.RecordDecl):
            lines.append(f"record {item.name}")
            lines.append("{")
            for ty, name in item.fields:
                lines.append(f"    {type_str(ty)} {name};")
            lines.append("}")
        else:
            lines += _stmt(item, 0)
    return "\n".join(lines) + "\n"
