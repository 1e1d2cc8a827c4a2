"""Flow-C syntax tree.

Every node carries its source span and a parse-order id (``nid``); neither
takes part in equality, so ``parse(print(tree)) == tree`` compares shape
only.  The extractor and the interpreter both key their output on ``nid``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..text import SourceSpan


# types ----------------------------------------------------------------------


@dataclass(frozen=True)
class TypeName:
    name: str  # int, str, void or a record name


@dataclass(frozen=True)
class ArrayType:
    elem: "Type"
    size: int


@dataclass(frozen=True)
class FnType:
    params: tuple


@dataclass(frozen=True)
class PtrType:
    elem: "Type"


Type = Union[TypeName, ArrayType, FnType, PtrType]


# nodes ------------------------------------------------------------------------


@dataclass(kw_only=True)
class Node:
    span: SourceSpan = field(compare=False, repr=False)
    nid: int = field(default=0, compare=False, repr=False)


# expressions


@dataclass(kw_only=True)
class IntLit(Node):
    value: int


@dataclass(kw_only=True)
class StrLit(Node):
    value: str


@dataclass(kw_only=True)
class Name(Node):
    name: str


@dataclass(kw_only=True)
class Index(Node):
    name: str
    index: "Expr"


@dataclass(kw_only=True)
class Field(Node):
    name: str
    field: str


@dataclass(kw_only=True)
class Call(Node):
    callee: str
    indirect: bool
    args: list


@dataclass(kw_only=True)
class AddrOf(Node):
    name: str


@dataclass(kw_only=True)
class BinOp(Node):
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, StrLit, Name, Index, Field, Call, AddrOf, BinOp]
LValue = Union[Name, Index, Field]


# statements


@dataclass(kw_only=True)
class Block(Node):
    stmts: list


@dataclass(kw_only=True)
class VarDecl(Node):
    static: bool
    type: Type
    name: str
    init: Optional[Expr] = None
    paren_init: bool = False


@dataclass(kw_only=True)
class HeapAlloc(Node):
    name: str
    type: Type


@dataclass(kw_only=True)
class Delete(Node):
    name: str


@dataclass(kw_only=True)
class Assign(Node):
    target: LValue
    value: Expr


@dataclass(kw_only=True)
class CallStmt(Node):
    call: Call


@dataclass(kw_only=True)
class Return(Node):
    value: Optional[Expr] = None


@dataclass(kw_only=True)
class If(Node):
    cond: Expr
    then: Block
    else_: Optional[Block] = None


@dataclass(kw_only=True)
class While(Node):
    cond: Expr
    body: Block


@dataclass(kw_only=True)
class Goto(Node):
    label: str


@dataclass(kw_only=True)
class Label(Node):
    name: str


@dataclass(kw_only=True)
class Break(Node):
    pass


@dataclass(kw_only=True)
class Continue(Node):
    pass


@dataclass(kw_only=True)
class Try(Node):
    body: Block
    var: str
    handler: Block


@dataclass(kw_only=True)
class Throw(Node):
    value: Expr


@dataclass(kw_only=True)
class Spawn(Node):
    call: Call


@dataclass(kw_only=True)
class Param(Node):
    type: Type
    name: str


@dataclass(kw_only=True)
class FuncDecl(Node):
    ret: Type
    name: str
    params: list
    body: Block


@dataclass(kw_only=True)
class RecordDecl(Node):
    name: str
    fields: list  # of (Type, name)


@dataclass(kw_only=True)
class Program(Node):
    items: list
    comments: list = field(default_factory=list, compare=False, repr=False)


Stmt = Union[
    Block, VarDecl, HeapAlloc, Delete, Assign, CallStmt, Return, If, While, Goto, Label,
    Break, Continue, Try, Throw, Spawn, FuncDecl,
]


def walk(node):
    """Pre-order traversal over every AST node (types excluded)."""
    yield node
    for name in getattr(node, "__dataclass_fields__", {}):
        if name in ("span", "nid", "comments"):
            continue
        value = getattr(node, name)
        if isinstance(value, Node):
            yield from walk(value)
        elif isinstance(value, list):
            for v in value:
                if isinstance(v, Node):
                    yield from walk(v)


def expr_calls(e) -> list:
    """Calls inside an expression in evaluation (post-)order: inner calls first."""
    out: list = []

    def go(x):
        if isinstance(x, Call):
            for a in x.args:
                go(a)
            out.append(x)
        elif isinstance(x, BinOp):
            go(x.left)
            go(x.right)
        elif isinstance(x, Index):
            go(x.index)

    if e is not None:
        go(e)
    return out
