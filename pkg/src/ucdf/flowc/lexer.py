"""Maximal-munch tokenizer for Flow-C.

Whitespace is not emitted, but every token carries its byte offset so the
source can be rebuilt exactly from the token list (see :func:`reconstruct`).
Line comments become ``comment`` tokens; the extractor turns them into
comment boxes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..text import SourceSpan

KEYWORDS = frozenset(
    """record void int str fn static new delete return if else while goto
    break continue try catch throw spawn""".split()
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>==|[{}()\[\];,=<+\-*&.:])
    """,
    re.VERBOSE,
)


class LexError(Exception):
    def __init__(self, span: SourceSpan, message: str) -> None:
        self.span = span
        super().__init__(f"{span.line}:{span.column}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | int | string | punct | comment
    text: str
    span: SourceSpan
    offset: int

    def is_(self, kind: str, text: str | None = None) -> bool:
        return self.kind == kind and (text is None or self.text == text)


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    pos = 0
    line, col = 1, 1
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source[pos] == '"':
                raise LexError(SourceSpan(line, col, 1), "unterminated string")
            raise LexError(SourceSpan(line, col, 1), f"illegal character {source[pos]!r}")
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            if kind == "word":
                kind = "keyword" if text in KEYWORDS else "ident"
            toks.append(Token(kind, text, SourceSpan(line, col, len(text)), pos))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    return toks


def reconstruct(source: str, tokens: list[Token]) -> str:
    """Token texts interleaved with the original inter-token whitespace."""
    out = []
    pos = 0
    for t in tokens:
        out.append(source[pos:t.offset])
        out.append(t.text)
        pos = t.offset + len(t.text)
    out.append(source[pos:])
    return "".join(out)
