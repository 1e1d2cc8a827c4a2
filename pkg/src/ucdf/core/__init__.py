"""Diagram model, rule checking and graph algorithms."""

from .model import (
    DATA_KINDS,
    Diagram,
    DiagramError,
    DiagramNode,
    Dispatch,
    Edge,
    EdgeKind,
    EdgeRef,
    Endpoint,
    HolderKind,
    NodeKind,
    NodeRef,
    OrderMark,
    Timeline,
    TimelinePos,
    new_diagram,
    structural_form,
    structurally_equal,
)
from .ops import alias_canonical, alias_map, contract, control_subtree, data_sources, splice_out
from .validate import RULE_CODES, Violation, validate

__all__ = [
    "DATA_KINDS", "Diagram", "DiagramError", "DiagramNode", "Dispatch", "Edge", "EdgeKind",
    "EdgeRef", "Endpoint", "HolderKind", "NodeKind", "NodeRef", "OrderMark", "Timeline",
    "TimelinePos", "new_diagram", "structural_form", "structurally_equal", "alias_canonical",
    "alias_map", "contract", "control_subtree", "data_sources", "splice_out", "RULE_CODES",
    "Violation", "validate",
]
