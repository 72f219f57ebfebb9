"""Adelic equidistribution toolkit for rational maps of P^1 over Q."""

__version__ = "0.1.0"
