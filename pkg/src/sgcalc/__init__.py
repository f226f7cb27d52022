"""Numerical Laplace-transform functional calculus for operator semigroups."""

__version__ = "0.1.0"
