"""Render experiment figures from safebandits CSV output.

Pure display layer: reads the documented CSV schemas, draws matplotlib
figures, and can dump the plotted series back to text so rendering stays
checkable against its input.
"""

from .plotting import PlotJob, SchemaError, render

__version__ = "0.1.0"
