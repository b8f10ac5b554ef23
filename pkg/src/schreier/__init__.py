"""Exact finite models of hierarchical sequence norms and their quotients."""

__version__ = "0.1.0"
