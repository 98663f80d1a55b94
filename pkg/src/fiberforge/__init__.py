"""Mapping class group words, Lefschetz fibration invariants and small-manifold SW enumeration."""

__version__ = "0.1.0"
