"""Offline figure rendering for dispersive-flow run artifacts."""

__version__ = "0.1.0"

from .figures import (FIGURE_KINDS, FigureSpec, SchemaError, annotations_for,
                      fmt, load_profile, load_report, load_trace, render,
                      report_value)

__all__ = [
    "FIGURE_KINDS", "FigureSpec", "SchemaError", "annotations_for", "fmt",
    "load_profile", "load_report", "load_trace", "render", "report_value",
]
