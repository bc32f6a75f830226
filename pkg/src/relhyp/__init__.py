"""Executable machinery for relatively hyperbolic groups at desk scale."""

__version__ = "0.1.0"
