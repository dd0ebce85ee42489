"""Quantum phase estimation with lossy two-mode interferometers."""

__version__ = "0.1.0"
