"""Exact computations for perfectoid towers over truncated p-adic polynomial rings."""

__version__ = "0.1.0"
