"""Resurgence analysis of holonomic ODEs and zero-dimensional partition functions."""
from . import exactnum  # noqa: F401  (sets the working precision)
from .errors import ResurgenceError

__all__ = ["ResurgenceError"]
__version__ = "0.1.0"
