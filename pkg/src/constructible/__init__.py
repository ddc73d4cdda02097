"""Exact computations with constructible complexes on finite cell complexes."""
from __future__ import annotations

from .field import GF, QQ, Field, FieldError, active_field, parse_field, use_field
from .kernels import BACKEND
from .linalg import Matrix

__all__ = ["BACKEND", "Field", "FieldError", "GF", "Matrix", "QQ", "active_field",
           "parse_field", "use_field"]
__version__ = "0.1.0"
