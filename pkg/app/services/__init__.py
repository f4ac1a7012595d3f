"""
Services package for the reconstruction toolkit.

This package contains the computational services for:
- Finite spaces and piecewise-linear functions on intervals
- Relations, ⊥⊥-ideals and Stone duality
- Basic maps and weighted composition classifiers
- Steinberg and Haar-weighted convolution algebras
- The acceptance suites
"""

from .funcrel import check_equi_expressibility, rel
from .ideals import recover_homeo, spectrum
from .basicmaps import build_basic, extract_transform, unique_basic_phi
from .classify import additive_decompose, kaplansky_recover_phi, weighted_decompose
from .steinberg import decompose_diagonal_preserving, enumerate_aut
from .haarconv import verify_ir_decomposition, verify_measured_decomposition
from .stone import duality_roundtrip, duality_roundtrip_space

__all__ = [
    "additive_decompose",
    "build_basic",
    "check_equi_expressibility",
    "decompose_diagonal_preserving",
    "duality_roundtrip",
    "duality_roundtrip_space",
    "enumerate_aut",
    "extract_transform",
    "kaplansky_recover_phi",
    "recover_homeo",
    "rel",
    "spectrum",
    "unique_basic_phi",
    "verify_ir_decomposition",
    "verify_measured_decomposition",
    "weighted_decompose",
]
