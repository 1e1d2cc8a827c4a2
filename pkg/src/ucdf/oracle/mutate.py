"""Single-deletion mutants of an extracted diagram, for measuring oracle strength.

A mutant removes one edge or one dispatch that some event of the run was
caused by (matched through origins).  Elements drawn only for branches the
run never took are not mutated, since no run can witness them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..core import Diagram, EdgeKind
from .conform import conform
from .trace import Trace

EVENT_EDGE_KINDS = (
    EdgeKind.DATA_UPDATE, EdgeKind.DATA_READ, EdgeKind.DATA_FLOW, EdgeKind.CREATE,
    EdgeKind.DESTROY, EdgeKind.CONTROL_PAR, EdgeKind.CONTROL_RETURN, EdgeKind.EXCEPTION,
)


@dataclass(frozen=True)
class Mutant:
    description: str
    diagram: Diagram


def mutants(d: Diagram, trace: Trace) -> Iterator[Mutant]:
    executed = {e.origin for e in trace.events}
    for eid in sorted(d.edges):
        e = d.edges[eid]
        if e.kind in EVENT_EDGE_KINDS and e.origins & executed:
            m = d.copy()
            del m.edges[eid]
            yield Mutant(f"delete {e.kind.value} edge {d.describe(e.src)} -> {d.describe(e.dst)}", m)
    for tid in sorted(d.timelines):
        t = d.timelines[tid]
        for i, x in enumerate(t.dispatches):
            if x.origin in executed:
                m = d.copy()
                del m.timelines[tid].dispatches[i]
                yield Mutant(f"delete dispatch {t.ident}:{x.rank} => {d.nodes[x.target].ident}", m)


@dataclass(frozen=True)
class MutationScore:
    killed: int
    total: int
    survivors: tuple

    @property
    def rate(self) -> float:
        return self.killed / self.total if self.total else 1.0


def mutation_score(d: Diagram, trace: Trace) -> MutationScore:
    killed = total = 0
    survivors = []
    for m in mutants(d, trace):
        total += 1
        if conform(m.diagram, trace):
            killed += 1
        else:
            survivors.append(m.description)
    return MutationScore(killed, total, tuple(survivors))
