"""Spectral outliers of sparse random symmetric matrices."""

__version__ = "0.1.0"
