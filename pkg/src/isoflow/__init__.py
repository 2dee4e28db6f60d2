"""Numerical verification of weighted 1-D reductions on isoparametric tubes."""

__version__ = "0.1.0"
