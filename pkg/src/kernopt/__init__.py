"""Numerical laboratory for misspecified kernelized optimization."""

__version__ = "0.1.0"
