"""Executable combinatorics for path spaces of pushouts of flows."""

__version__ = "0.1.0"
