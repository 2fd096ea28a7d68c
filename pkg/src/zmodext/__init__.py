"""Exact homological algebra over Z/N and square-zero extensions Z/N' -> Z/N."""

__version__ = "0.1.0"
