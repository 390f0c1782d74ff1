"""Accelerated stochastic subgradient methods for problems with a local error bound."""

__version__ = "0.1.0"

from . import geometry, oracle, problems, solvers  # noqa: E402
from .errors import (  # noqa: E402
    AssgError,
    ConfigurationError,
    InvalidInputError,
    NumericalFailure,
    ParseError,
)

__all__ = [
    "AssgError", "ConfigurationError", "InvalidInputError", "NumericalFailure", "ParseError",
    "__version__", "geometry", "oracle", "problems", "solvers",
]
