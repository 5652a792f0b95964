"""Weyl m-functions and their value distribution for half-line Schrödinger operators."""

__version__ = "0.1.0"
