"""
Reconstruct - exact reconstruction toolkit.

This package contains the finite and piecewise-linear function families,
their relation and ideal machinery, the Stone duality and basic-map
reconstructions, weighted composition classifiers and the Steinberg and
Haar-weighted convolution algebra decompositions, together with the
command-line interface that drives them.
"""

__version__ = "1.0.0"
__author__ = "Reconstruct Team"
