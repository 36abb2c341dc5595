"""Exact-arithmetic laboratory for the Coble cubic and sextic over finite fields."""

from coblelab.fields import GF, QQ, FieldElem, FieldError, FieldSpec

__version__ = "0.1.0"

__all__ = ["GF", "QQ", "FieldElem", "FieldError", "FieldSpec", "__version__"]
