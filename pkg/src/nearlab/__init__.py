"""Numerical laboratory for model subspaces of L2(R), symmetric
restrictions of multiplication, and nearly invariant subspaces."""

from .config import DEFAULT, Tolerances

__version__ = "0.1.0"

__all__ = ["DEFAULT", "Tolerances", "__version__"]
