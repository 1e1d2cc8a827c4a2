"""DOT and SVG emitters driven by a style table."""

from .dot import RenderRefused, emit_dot
from .style import DEFAULT_STYLE, StyleError, StyleTable, load_style, parse_style
from .svg import emit_svg

__all__ = ["RenderRefused", "emit_dot", "emit_svg", "DEFAULT_STYLE", "StyleError", "StyleTable",
           "load_style", "parse_style"]
