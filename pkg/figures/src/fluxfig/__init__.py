"""Figure regeneration from fluxcat CSV outputs.

Strictly read-only over the CSVs: every number plotted originates in the
numerical pipeline; this package only applies display transforms (scaling,
offsets, axis cosmetics).
"""

__version__ = "0.1.0"

from .render import FigureSpec, MissingColumnError, read_table, render

__all__ = ["FigureSpec", "MissingColumnError", "read_table", "render"]
