"""
Exact number utilities.

This module provides parsing and formatting of rationals in the
``"p/q"`` wire format and a small Gaussian-rational type (``a + bi`` with
``a, b`` rational) used wherever complex scalars are needed. No floating
point value is ever produced.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Union

from app.utils.errors import InstanceFormatError, ModulusNotRational

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def parse_rational(value: Any) -> Fraction:
    """
    Parse a rational number from its JSON encoding.

    Args:
        value: An int or a string such as ``"3"``, ``"-1/4"``

    Returns:
        Fraction: The exact value

    Raises:
        InstanceFormatError: If the value is a float or cannot be parsed
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceFormatError(f"Inexact number not allowed: {value!r}", {"value": repr(value)})
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise InstanceFormatError(f"Rationals must be written as p/q: {value!r}", {"value": value})
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise InstanceFormatError(f"Invalid rational {value!r}: {e}", {"value": value})
    raise InstanceFormatError(f"Unsupported rational encoding: {value!r}", {"value": repr(value)})


def format_rational(value: Rational) -> str:
    """Format a rational as ``"p"`` or ``"p/q"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_sqrt(value: Rational) -> Optional[Fraction]:
    """Return the exact square root of a non-negative rational, or None."""
    value = Fraction(value)
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


@dataclass(frozen=True)
class GaussianRational:
    """An element ``re + im*i`` of the Gaussian rationals."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def coerce(value: Any) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return GaussianRational(Fraction(value), Fraction(0))
        raise TypeError(f"Cannot coerce {value!r} to a Gaussian rational")

    def __add__(self, other: Any) -> "GaussianRational":
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other: Any) -> "GaussianRational":
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: Any) -> "GaussianRational":
        return GaussianRational.coerce(other) - self

    def __mul__(self, other: Any) -> "GaussianRational":
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "GaussianRational":
        other = GaussianRational.coerce(other)
        denominator = other.norm_squared()
        if denominator == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        product = self * other.conjugate()
        return GaussianRational(product.re / denominator, product.im / denominator)

    def __rtruediv__(self, other: Any) -> "GaussianRational":
        return GaussianRational.coerce(other) / self

    def __eq__(self, other: Any) -> bool:
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm_squared(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def modulus(self) -> Fraction:
        """
        Exact modulus ``|z|``.

        Raises:
            ModulusNotRational: If ``re² + im²`` is not a rational square
        """
        root = rational_sqrt(self.norm_squared())
        if root is None:
            raise ModulusNotRational(
                f"Modulus of {self} is irrational",
                {"value": to_json_number(self)},
            )
        return root

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self) -> str:
        return f"GaussianRational({format_rational(self.re)}, {format_rational(self.im)})"

    def __str__(self) -> str:
        if self.im == 0:
            return format_rational(self.re)
        return f"{format_rational(self.re)}+{format_rational(self.im)}i"


I = GaussianRational(0, 1)
UNIT_PHASES = (GaussianRational(1), I, GaussianRational(-1), -I)


def is_unit_phase(value: Any) -> bool:
    """True when ``value`` is one of ``1, i, -1, -i``."""
    return GaussianRational.coerce(value) in UNIT_PHASES


def parse_gaussian(value: Any) -> GaussianRational:
    """
    Parse a Gaussian rational from ``{"re": "p/q", "im": "p/q"}`` or a rational.

    Raises:
        InstanceFormatError: On any malformed encoding
    """
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            raise InstanceFormatError(f"Unknown Gaussian rational keys: {sorted(unknown)}")
        return GaussianRational(parse_rational(value.get("re", 0)), parse_rational(value.get("im", 0)))
    return GaussianRational(parse_rational(value), Fraction(0))


def to_json_number(value: Any) -> Any:
    """Encode an exact number for JSON output."""
    if isinstance(value, GaussianRational):
        if value.im == 0:
            return format_rational(value.re)
        return {"re": format_rational(value.re), "im": format_rational(value.im)}
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return format_rational(value)
    return value
