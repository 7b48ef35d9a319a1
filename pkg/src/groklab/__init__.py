"""Grokking lab: spectral feature machines on modular arithmetic, with
complexity, geometry and intervention diagnostics."""

__version__ = "0.1.0"
