"""Trace events and the tab-separated trace file format.

A trace file starts with ``# symtab <hash>`` followed by one event per line::

    seq <TAB> thread <TAB> Event <TAB> arg ... <TAB> @origin

Arguments are symbol fingerprints (``name#sid``), ``ret:name#sid`` for a
function's return slot, or ``<root>`` for the caller of the entry
function.  ``origin`` is the id of the syntax node that caused the event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ARITY = {
    "Call": 2, "IndirectCall": 2, "Write": 1, "Read": 1, "Alloc": 1, "Free": 1, "Spawn": 1,
    "Throw": 0, "Catch": 1, "Jump": 1, "EnterBlock": 1, "ExitBlock": 1, "Return": 1,
}
EVENT_NAMES = tuple(ARITY)
ROOT = "<root>"


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    thread: int
    name: str
    args: tuple = ()
    origin: int = 0

    def line(self) -> str:
        return "\t".join([str(self.seq), str(self.thread), self.name, *self.args, f"@{self.origin}"])


@dataclass
class Trace:
    fingerprint: str
    events: list[TraceEvent] = field(default_factory=list)

    def to_text(self) -> str:
        return "".join(line + "\n" for line in [f"# symtab {self.fingerprint}"]
                       + [e.line() for e in self.events])

    def names(self) -> list[str]:
        return [e.name for e in self.events]


def parse_trace(text: str) -> Trace:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# symtab "):
        raise TraceFormatError("missing '# symtab' header")
    trace = Trace(lines[0][len("# symtab "):].strip())
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 4 or not parts[-1].startswith("@"):
            raise TraceFormatError(f"line {n}: malformed event")
        try:
            seq, thread, origin = int(parts[0]), int(parts[1]), int(parts[-1][1:])
        except ValueError:
            raise TraceFormatError(f"line {n}: malformed number") from None
        if parts[2] not in EVENT_NAMES:
            raise TraceFormatError(f"line {n}: unknown event {parts[2]!r}")
        if len(parts) - 4 != ARITY[parts[2]]:
            raise TraceFormatError(f"line {n}: {parts[2]} takes {ARITY[parts[2]]} argument(s)")
        trace.events.append(TraceEvent(seq, thread, parts[2], tuple(parts[3:-1]), origin))
    return trace
