"""Exact growth computations for monomial, wreath-product and Toeplitz algebras."""

__version__ = "0.1.0"
