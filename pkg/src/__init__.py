"""Coherent diffuse light transport in an ultracold 85Rb cloud under a Raman control field."""

__version__ = "0.1.0"
