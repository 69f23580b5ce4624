"""Exact finite-field harmonic analysis laboratory."""
from .field import FiniteField, make_field, field_of_order

__all__ = ["FiniteField", "make_field", "field_of_order"]
__version__ = "0.1.0"
