"""
Utilities package for the reconstruction toolkit.

This package contains utility functions for:
- Exact rational and Gaussian rational arithmetic
- The error hierarchy shared by every service
- Logging and structured events
- JSON instance files (``app.utils.serialization``)
"""

from .errors import InvalidInstance, Refutation, VerificationError
from .exact import GaussianRational, format_rational, parse_gaussian, parse_rational
from .logger import log_event, setup_logging

__all__ = [
    "GaussianRational",
    "InvalidInstance",
    "Refutation",
    "VerificationError",
    "format_rational",
    "log_event",
    "parse_gaussian",
    "parse_rational",
    "setup_logging",
]
