"""Characteristic-coordinate solver and singularity analysis for
u_tt - c(u)(c(u) u_x)_x = 0."""

__version__ = "0.1.0"
