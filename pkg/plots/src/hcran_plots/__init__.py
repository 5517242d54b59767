"""Figure rendering for the H-CRAN simulator's CSV outputs."""

from .render import FIGURES, render
from .schema import EmptyTableError, SchemaError, load_sweep, load_trace

__version__ = "0.1.0"
