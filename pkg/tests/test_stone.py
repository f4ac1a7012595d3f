"""Tests for finite Boolean algebras and Stone duality."""

import pytest

from app.services.fintop import chain_space, discrete_space, is_discrete, make_space
from app.services.stone import (
    algebra_from_ro,
    duality_roundtrip,
    duality_roundtrip_space,
    is_conditionally_complete,
    ko,
    make_algebra,
    power_set_algebra,
    ro_equals_ko,
    spec,
    ultrafilters,
)
from app.utils.errors import InstanceFormatError, NotZeroDimensional, TrivialAlgebra


def chain_tables(n):
    elements = list(range(n))
    meet = {(a, b): min(a, b) for a in elements for b in elements}
    join = {(a, b): max(a, b) for a in elements for b in elements}
    return elements, meet, join


class TestMakeAlgebra:
    def test_two_element_chain(self):
        B = make_algebra(*chain_tables(2), zero=0)
        assert len(B) == 2
        assert B.atoms() == [1]

    def test_three_element_chain_lacks_complements(self):
        with pytest.raises(InstanceFormatError):
            make_algebra(*chain_tables(3), zero=0)

    def test_partial_table(self):
        elements, meet, join = chain_tables(2)
        del meet[0, 1]
        with pytest.raises(InstanceFormatError):
            make_algebra(elements, meet, join, 0)

    def test_relative_complements_of_power_set(self):
        B = power_set_algebra(["p", "q"])
        top = frozenset({"p", "q"})
        assert B.diff(top, frozenset({"p"})) == {"q"}


class TestSpec:
    def test_ultrafilters_are_atoms(self):
        assert len(ultrafilters(power_set_algebra(range(3)))) == 3

    def test_spec_is_discrete(self):
        X = spec(power_set_algebra([0, 1]))
        assert len(X.points) == 2
        assert is_discrete(X)

    def test_trivial_algebra(self):
        B = make_algebra(*chain_tables(1), zero=0)
        with pytest.raises(TrivialAlgebra):
            spec(B)


class TestKo:
    def test_discrete_three_points(self, three_points):
        assert len(ko(three_points)) == 8

    def test_sierpinski_is_not_zero_dimensional(self, sierpinski):
        with pytest.raises(NotZeroDimensional) as exc:
            ko(sierpinski)
        assert exc.value.witness["open"] == ["a"]

    def test_ro_of_sierpinski(self, sierpinski):
        assert len(algebra_from_ro(sierpinski)) == 2


class TestDuality:
    @pytest.mark.parametrize("atoms", [1, 2, 3])
    def test_algebra_round_trip(self, atoms):
        assert duality_roundtrip(power_set_algebra(range(atoms))).verified

    @pytest.mark.parametrize("points", [1, 2, 4])
    def test_space_round_trip(self, points):
        assert duality_roundtrip_space(discrete_space(range(points))).verified

    def test_conditionally_complete(self):
        assert is_conditionally_complete(power_set_algebra([0, 1]))


class TestRoKo:
    def test_discrete_space(self, two_points):
        assert ro_equals_ko(two_points).equal

    def test_chain(self):
        assert ro_equals_ko(chain_space(3)).equal

    def test_two_open_points_over_a_closed_one(self):
        X = make_space([0, 1, 2], [set(), {0}, {1}, {0, 1}, {0, 1, 2}])
        report = ro_equals_ko(X)
        assert not report.equal
        assert report.only_regular_open == [frozenset({0}), frozenset({1})]
        assert report.only_clopen == []
