"""Deterministic 2D multi-robot coverage simulator."""

__version__ = "0.1.0"
