"""Scar graphs: constrained spin-chain Hilbert spaces, revivals and Krylov ladders."""
__version__ = "0.1.0"
