"""Unified control/data flow (UCDF) diagrams: model, text format, Flow-C
extraction, a tracing reference interpreter and renderers."""

__version__ = "0.1.0"
