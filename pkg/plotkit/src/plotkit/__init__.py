"""Publication-style figures from QKD sweep CSV tables."""

from .dataio import DataError, TableRow, read_table
from .figspec import DEFAULT_COLORS, FigureKind, FigureSpec, SpecError, load_figure_spec
from .render import render

__all__ = [
    "DEFAULT_COLORS",
    "DataError",
    "FigureKind",
    "FigureSpec",
    "SpecError",
    "TableRow",
    "load_figure_spec",
    "read_table",
    "render",
]

__version__ = "1.0.0"
