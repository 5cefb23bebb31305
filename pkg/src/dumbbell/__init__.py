"""Spectral computations for the Neumann biharmonic operator on dumbbell domains."""

__version__ = "0.1.0"
