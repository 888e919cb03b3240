"""Existence certificates and numerical periodic orbits of forced mechanical systems."""

__version__ = "0.1.0"
