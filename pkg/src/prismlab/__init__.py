"""Exact arithmetic for prismatic period rings at finite precision."""

__version__ = "0.1.0"
