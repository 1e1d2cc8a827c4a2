"""Command-line interface.

Exit codes: 0 clean, 1 violations or discrepancies found, 2 bad input,
3 usage error, 4 internal error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .core import DiagramError, contract, validate
from .extract import ExtractError, ExtractOptions, extract
from .flowc.lexer import LexError
from .flowc.parser import FlowParseError, parse_source
from .flowc.symbols import SemanticErrors, resolve_symbols
from .oracle.conform import FingerprintMismatch, conform
from .oracle.interp import RuntimeFault, run
from .render import RenderRefused, StyleError, emit_dot, emit_svg, load_style
from .text import ParseError, canonicalize, parse, serialize

OK, FOUND, BAD_INPUT, USAGE, INTERNAL = 0, 1, 2, 3, 4

_GRANULARITY = {"op": "operator", "block": "block", "func": "function"}
_GROUPING = {"has": "has_edges", "euler": "euler"}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _threshold(text: str) -> Optional[int]:
    if text == "off":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'off'") from None
    if n < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return n


def _extract_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--granularity", choices=list(_GRANULARITY), default="op")
    p.add_argument("--call-style", choices=["simplified", "full"], default="simplified")
    p.add_argument("--grouping", choices=list(_GROUPING), default="has")
    p.add_argument("--alias-threshold", type=_threshold, default=None, metavar="N|off")
    p.add_argument("--entry", metavar="NAME")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucdf", description="UCDF diagram toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="parse and validate a diagram")
    s.add_argument("file")

    s = sub.add_parser("fmt", help="canonicalize a diagram")
    s.add_argument("file")
    s.add_argument("-i", "--in-place", action="store_true")

    s = sub.add_parser("extract", help="extract a diagram from a Flow-C program")
    s.add_argument("file")
    _extract_flags(s)
    s.add_argument("-o", "--output")

    s = sub.add_parser("render", help="render a diagram as DOT or SVG")
    s.add_argument("file")
    s.add_argument("--format", choices=["dot", "svg"], default="dot")
    s.add_argument("--force", action="store_true", help="render even with violations")
    s.add_argument("-o", "--output")

    s = sub.add_parser("trace", help="run a Flow-C program and write its trace")
    s.add_argument("file")
    s.add_argument("--entry", metavar="NAME")
    s.add_argument("-o", "--output")

    s = sub.add_parser("conform", help="check a run against the extracted diagram")
    s.add_argument("file")
    _extract_flags(s)
    s.add_argument("--strict", action="store_true", help="also require exact return ranks")

    s = sub.add_parser("compact", help="contract one process to its input/output view")
    s.add_argument("file")
    s.add_argument("--process", required=True, metavar="NAME")
    s.add_argument("-o", "--output")
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _load_diagram(path: str):
    try:
        return parse(_read(path))
    except (ParseError, DiagramError) as e:
        raise InputError(f"{path}:{e}") from None


def _load_program(path: str):
    try:
        program = parse_source(_read(path))
        return program, resolve_symbols(program)
    except (LexError, FlowParseError) as e:
        raise InputError(f"{path}:{e}") from None
    except SemanticErrors as e:
        raise InputError("\n".join(f"{path}:{x}" for x in e.errors)) from None


def _options(args) -> ExtractOptions:
    return ExtractOptions(
        granularity=_GRANULARITY[args.granularity],
        call_style=args.call_style,
        grouping=_GROUPING[args.grouping],
        alias_threshold=args.alias_threshold,
        entry=args.entry,
    )


def _warn_unresolved(report) -> None:
    for span, callee in report.unresolved_indirect_calls:
        print(f"warning: {span.line}:{span.column}: indirect call through {callee} "
              "has no unique target", file=sys.stderr)


def _check(args) -> int:
    d = _load_diagram(args.file)
    found = validate(d)
    for v in found:
        print(v.render(d))
    return FOUND if found else OK


def _fmt(args) -> int:
    try:
        text = canonicalize(_read(args.file))
    except (ParseError, DiagramError) as e:
        raise InputError(f"{args.file}:{e}") from None
    _write(args.file if args.in_place else None, text)
    return OK


def _extract(args) -> int:
    program, table = _load_program(args.file)
    report = extract(program, table, _options(args))
    _warn_unresolved(report)
    _write(args.output, serialize(report.diagram))
    return OK


def _render(args) -> int:
    d = _load_diagram(args.file)
    emit = emit_svg if args.format == "svg" else emit_dot
    try:
        out = emit(d, load_style(), force=args.force)
    except RenderRefused as e:
        for v in e.violations:
            print(v.render(d), file=sys.stderr)
        print("render refused: diagram has violations (use --force)", file=sys.stderr)
        return FOUND
    _write(args.output, out)
    return OK


def _trace(args) -> int:
    program, table = _load_program(args.file)
    try:
        trace = run(program, table, args.entry)
    except RuntimeFault as e:
        raise InputError(f"{args.file}:{e}") from None
    _write(args.output, trace.to_text())
    return OK


def _conform(args) -> int:
    program, table = _load_program(args.file)
    options = _options(args)
    report = extract(program, table, options)
    _warn_unresolved(report)
    try:
        trace = run(program, table, options.entry)
    except RuntimeFault as e:
        raise InputError(f"{args.file}:{e}") from None
    found = conform(report.diagram, trace, strict_ranks=args.strict)
    for x in found:
        print(x)
    return FOUND if found else OK


def _compact(args) -> int:
    d = _load_diagram(args.file)
    n = d.node_by_ident(args.process)
    if n is None or not n.is_process_like:
        raise InputError(f"{args.file}: no process named {args.process!r}")
    _write(args.output, serialize(contract(d, n.id)))
    return OK


_COMMANDS = {
    "check": _check, "fmt": _fmt, "extract": _extract, "render": _render,
    "trace": _trace, "conform": _conform, "compact": _compact,
}


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"ucdf: usage error: {e}", file=sys.stderr)
        return USAGE
    try:
        return _COMMANDS[args.command](args)
    except (InputError, ExtractError, StyleError, FingerprintMismatch) as e:
        print(f"ucdf: {e}", file=sys.stderr)
        return BAD_INPUT
    except Exception as e:  # pragma: no cover - last-resort guard
        print(f"ucdf: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
