"""Numerical toolkit for mating correspondences between Fuchsian-group circle maps and rational maps."""

__version__ = "0.1.0"
