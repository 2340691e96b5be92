"""Figure scripts over the coulombgas CSV suite."""

from .figures import FigureSpec, fit_loglog, render
from .io import CsvFormatError, CsvTable, load_positions, read_table

__all__ = [
    "CsvFormatError",
    "CsvTable",
    "FigureSpec",
    "fit_loglog",
    "load_positions",
    "read_table",
    "render",
]

__version__ = "0.1.0"
