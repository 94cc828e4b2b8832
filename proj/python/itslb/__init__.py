"""Worst-case lower bounds for integer transition systems."""

from ._core import analyze, simplify, parse_roundtrip, max_cost, __version__

__all__ = ["analyze", "simplify", "parse_roundtrip", "max_cost", "__version__"]
