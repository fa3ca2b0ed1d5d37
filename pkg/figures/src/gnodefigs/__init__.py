"""Render publication figures from gnodelab CSV/JSONL result files."""

__version__ = "0.1.0"

from .errors import SchemaError, SpecError
from .spec import KINDS, FigureSpec, load_spec
from .render import render

__all__ = ["FigureSpec", "KINDS", "SchemaError", "SpecError", "load_spec",
           "render", "__version__"]
