"""Anisotropic bootstrap percolation: closures, stable sets, Monte Carlo and beams."""

__version__ = "0.1.0"
