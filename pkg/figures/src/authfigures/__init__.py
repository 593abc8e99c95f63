"""Figure regeneration for arrayauth simulation CSVs."""

from authfigures.plotting import FigureSpec, SchemaError, plot_rate_curve, read_curve_rows

__all__ = ["FigureSpec", "SchemaError", "plot_rate_curve", "read_curve_rows"]

__version__ = "0.1.0"
