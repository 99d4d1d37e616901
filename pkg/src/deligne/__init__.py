"""Metric, combinatorial and group-theoretic tools for two-dimensional Artin groups of hyperbolic type."""

__version__ = "0.1.0"
