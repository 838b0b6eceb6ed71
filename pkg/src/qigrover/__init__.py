"""Tensor-network simulation of Grover search and single-call SAT solving."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .errors import DimacsParseError, InvalidInputError, InvalidStateError, NumericalFailure

__all__ = [
    "DimacsParseError",
    "InvalidInputError",
    "InvalidStateError",
    "NumericalFailure",
    "__version__",
]
