"""Executable constructions for computable reducibility of equivalence relations and preorders."""

__version__ = "0.1.0"
