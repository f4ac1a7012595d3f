"""Tests for function families and the disjointness relations."""

from fractions import Fraction

import pytest

from app.services.funcrel import (
    check_equi_expressibility,
    compatibility_order,
    full_family,
    is_regular,
    is_weakly_regular,
    make_discrete_family,
    make_pl_family,
    perp_via_preceq,
    regularity_report,
    rel,
    relation_matrix,
    syntactic_rel,
)
from app.services.plspace import IntervalSet, closed, tent
from app.utils.errors import InstanceFormatError, NotInFamily, RegularityUndecidablePL

UNIT = IntervalSet.from_pairs([(0, 1)])

# full_family over points (a, b) with values (0, 1):
# 0 = θ = (0, 0), 1 = (0, 1), 2 = (1, 0), 3 = (1, 1)
THETA, B_ONLY, A_ONLY, BOTH = range(4)


@pytest.fixture
def binary(two_points):
    return full_family(two_points, (0, 1))


@pytest.fixture
def sierpinski_family(sierpinski):
    return make_discrete_family(sierpinski, (0, 1), [(0, 0), (1, 0), (1, 1)])


class TestFamilies:
    def test_full_family_order(self, binary):
        assert binary.members[A_ONLY] == (1, 0)
        assert binary.theta_index == THETA

    def test_member_must_differ_on_open_set(self, sierpinski):
        with pytest.raises(InstanceFormatError):
            make_discrete_family(sierpinski, (0, 1), [(0, 0), (0, 1)])

    def test_value_outside_codomain(self, two_points):
        with pytest.raises(InstanceFormatError):
            make_discrete_family(two_points, (0, 1), [(0, 0), (0, 5)])

    def test_dict_members(self, two_points):
        family = make_discrete_family(two_points, (0, 1), [{"a": 0, "b": 0}, {"a": 1, "b": 0}])
        assert family.members[1] == (1, 0)

    def test_pl_family_prepends_theta(self):
        family = make_pl_family(UNIT, [tent(UNIT, Fraction(1, 2), closed(0, 1))])
        assert len(family) == 2
        assert family.theta_index == 0


class TestSemanticRelations:
    def test_disjoint_indicators(self, binary):
        assert rel("perp", A_ONLY, B_ONLY, binary)
        assert rel("perpperp", A_ONLY, B_ONLY, binary)
        assert not rel("perp", BOTH, B_ONLY, binary)

    def test_subset(self, binary):
        assert rel("subset", B_ONLY, BOTH, binary)
        assert not rel("subset", BOTH, B_ONLY, binary)
        assert rel("strongsubset", B_ONLY, BOTH, binary)

    def test_theta_is_orthogonal_to_everything(self, binary):
        assert all(relation_matrix("perp", binary)[THETA])

    def test_bad_index(self, binary):
        with pytest.raises(NotInFamily):
            rel("perp", 0, 9, binary)

    def test_touching_tents(self):
        f = tent(UNIT, Fraction(1, 4), closed(0, Fraction(1, 2)))
        g = tent(UNIT, Fraction(3, 4), closed(Fraction(1, 2), 1))
        family = make_pl_family(UNIT, [f, g])
        assert rel("perp", 1, 2, family)
        assert not rel("perpperp", 1, 2, family)

    def test_strong_subset_of_nested_tents(self):
        small = tent(UNIT, Fraction(1, 2), closed(Fraction(3, 8), Fraction(5, 8)))
        big = tent(UNIT, Fraction(1, 2), closed(Fraction(1, 4), Fraction(3, 4)))
        family = make_pl_family(UNIT, [small, big])
        assert rel("strongsubset", 1, 2, family)
        assert not rel("strongsubset", 2, 1, family)


class TestEquiExpressibility:
    def test_full_discrete_families(self, binary, three_points):
        assert check_equi_expressibility(binary).holds
        report = check_equi_expressibility(full_family(three_points, (0, 1)))
        assert report.holds
        assert report.pairs_checked == 64

    def test_each_item_matches_semantics(self, binary):
        for f in binary.indices:
            for g in binary.indices:
                assert syntactic_rel("perpperp", f, g, binary, item="e") == rel("perpperp", f, g, binary)
                assert syntactic_rel("strongsubset", f, g, binary, item="f") == rel("strongsubset", f, g, binary)

    def test_item_must_match_relation(self, binary):
        with pytest.raises(ValueError):
            syntactic_rel("perp", 0, 1, binary, item="a")


class TestRegularity:
    def test_discrete_full_family_is_regular(self, binary):
        assert is_weakly_regular(binary)
        assert is_regular(binary)

    def test_sierpinski_family_fails_at_open_point(self, sierpinski_family):
        verdict = regularity_report(sierpinski_family)
        assert not verdict
        assert [f["point"] for f in verdict.failures] == ["a"]

    def test_pl_grid_check_is_strict_on_request(self):
        f = tent(UNIT, Fraction(1, 2), closed(0, 1))
        family = make_pl_family(UNIT, [f])
        assert not is_weakly_regular(family)
        with pytest.raises(RegularityUndecidablePL):
            is_weakly_regular(family, strict=True)

    def test_regularity_needs_discrete_backend(self):
        family = make_pl_family(UNIT, [tent(UNIT, Fraction(1, 2), closed(0, 1))])
        with pytest.raises(InstanceFormatError):
            is_regular(family)


class TestCompatibilityOrder:
    def test_theta_is_below_everything(self, binary):
        assert all(compatibility_order(THETA, g, binary) for g in binary.indices)

    def test_extension(self, binary):
        assert compatibility_order(A_ONLY, BOTH, binary)
        assert not compatibility_order(BOTH, A_ONLY, binary)

    def test_perp_through_order(self, binary):
        for f in binary.indices:
            for g in binary.indices:
                assert perp_via_preceq(f, g, binary) == rel("perp", f, g, binary)
