"""Directed homotopy tools for precubical sets and mutex programs."""

__version__ = "0.1.0"
