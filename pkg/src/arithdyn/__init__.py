"""Arithmetic and complex dynamics of one-parameter families of rational maps."""

__version__ = "0.1.0"
