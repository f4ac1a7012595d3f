"""Tests for exact rational and Gaussian-rational arithmetic."""

from fractions import Fraction

import pytest

from app.utils.errors import InstanceFormatError, ModulusNotRational
from app.utils.exact import (
    I,
    GaussianRational,
    format_rational,
    is_unit_phase,
    parse_gaussian,
    parse_rational,
    rational_sqrt,
    to_json_number,
)


class TestParseRational:
    def test_reduces_fraction(self):
        assert parse_rational("3/6") == Fraction(1, 2)

    def test_integer_forms(self):
        assert parse_rational(4) == 4
        assert parse_rational("-7") == -7

    @pytest.mark.parametrize("value", [0.5, "0.5", "1e3", True, None, "1/0", "abc"])
    def test_rejects_inexact_or_malformed(self, value):
        with pytest.raises(InstanceFormatError):
            parse_rational(value)


class TestFormatRational:
    def test_integer_has_no_denominator(self):
        assert format_rational(Fraction(4, 2)) == "2"

    def test_fraction(self):
        assert format_rational(Fraction(-3, 4)) == "-3/4"


class TestRationalSqrt:
    def test_perfect_square(self):
        assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)

    def test_irrational_root(self):
        assert rational_sqrt(2) is None

    def test_negative(self):
        assert rational_sqrt(-1) is None


class TestGaussianRational:
    def test_conjugate_product_is_norm(self):
        z = GaussianRational(1, 1)
        assert z * z.conjugate() == 2

    def test_i_squared(self):
        assert I * I == -1

    def test_division_inverts_multiplication(self):
        z = GaussianRational(Fraction(1, 2), 3)
        w = GaussianRational(2, -1)
        assert (z * w) / w == z

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            I / 0

    def test_modulus_of_pythagorean_value(self):
        assert GaussianRational(Fraction(3, 5), Fraction(4, 5)).modulus() == 1

    def test_irrational_modulus_raises(self):
        with pytest.raises(ModulusNotRational):
            GaussianRational(1, 1).modulus()

    def test_real_values_hash_like_fractions(self):
        assert GaussianRational(Fraction(1, 2)) == Fraction(1, 2)
        assert hash(GaussianRational(Fraction(1, 2))) == hash(Fraction(1, 2))

    def test_unit_phases(self):
        assert is_unit_phase(-I)
        assert is_unit_phase(1)
        assert not is_unit_phase(GaussianRational(Fraction(3, 5), Fraction(4, 5)))


class TestGaussianWireFormat:
    def test_parse_object(self):
        assert parse_gaussian({"re": "1/2", "im": "-1"}) == GaussianRational(Fraction(1, 2), -1)

    def test_parse_plain_rational(self):
        assert parse_gaussian("2/3") == Fraction(2, 3)

    def test_unknown_key(self):
        with pytest.raises(InstanceFormatError):
            parse_gaussian({"re": 1, "imag": 0})

    def test_encoding(self):
        assert to_json_number(GaussianRational(0, Fraction(1, 3))) == {"re": "0", "im": "1/3"}
        assert to_json_number(GaussianRational(5)) == "5"
        assert to_json_number(Fraction(7, 2)) == "7/2"
        assert to_json_number("label") == "label"
