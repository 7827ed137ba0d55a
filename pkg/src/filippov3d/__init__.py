"""Numerical analysis toolkit for 3D piecewise-smooth vector fields.

Pipeline: fields -> manifold -> tangency -> sliding / flow -> blocks ->
stability, orchestrated by the CLI in :mod:`filippov3d.cli`.
"""

from .expressions import FieldExpression, parse_field
from .fields import (
    Box,
    FilippovSystem,
    JetBundle,
    SystemCatalogEntry,
    catalog,
    lie_derivative,
    system_from_strings,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "FieldExpression",
    "FilippovSystem",
    "JetBundle",
    "SystemCatalogEntry",
    "catalog",
    "lie_derivative",
    "parse_field",
    "system_from_strings",
    "__version__",
]
