"""Toric self-dual Einstein and scalar-flat Kähler metrics from cyclic quotient singularities."""

__version__ = "0.1.0"
