"""Mutual algebraicity and cellularity for finite relational structures."""

__version__ = "0.1.0"
