"""Numerical laboratory for chaotic-like energy exchange between resonant
Fourier modes of cubic Wave/Beam and Hartree equations on the 2-torus."""

__version__ = "0.1.0"
