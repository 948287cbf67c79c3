"""Exact counting, inclusion and coin-flip measure tools for unambiguous grammars and automata."""

__version__ = "0.1.0"
