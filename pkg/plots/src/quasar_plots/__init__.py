"""Plotting layer for quasar-opt benchmark traces.

Strictly a presentation tool: it reads the documented trace CSV schemas
and never recomputes an optimization quantity.
"""

from .render import PlotSpec, SchemaError, read_series, render

__version__ = "0.1.0"
