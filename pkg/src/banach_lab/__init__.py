"""Exact computations around Tsirelson's space and finite dividing-line checks."""
from .tsirelson import tsirelson_iterates, tsirelson_norm
from .vectors import FiniteVector, Interval, NormSpace, basis, make_vector, summing

__all__ = [
    "FiniteVector",
    "Interval",
    "NormSpace",
    "basis",
    "make_vector",
    "summing",
    "tsirelson_iterates",
    "tsirelson_norm",
]
__version__ = "0.1.0"
