"""Instantiation analysis for polymorphically typed logic programs."""

__version__ = "0.1.0"
