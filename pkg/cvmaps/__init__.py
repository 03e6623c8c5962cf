"""Discretized continuous-variable density matrices, cut maps and entanglement measures."""

__version__ = "1.0.0"
