"""Biased multi-objective test problems and ideal-point estimation benchmarks."""

__version__ = "0.1.0"
