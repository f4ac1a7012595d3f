"""Tests for exact piecewise-linear functions and interval sets."""

from fractions import Fraction

import pytest

from app.services.plspace import (
    IntervalSet,
    closed,
    make_density,
    make_pl,
    milgram_witness,
    open_interval,
    pl_add,
    pl_equal,
    pl_l1_norm,
    pl_multiply,
    pl_sigma,
    pl_sup_norm,
    pl_support,
    pl_zero_set,
    plateau,
    tent,
    uniform_density,
    zero_function,
)
from app.utils.errors import (
    DensityNotPositive,
    DomainMismatch,
    GapEmpty,
    InstanceFormatError,
    NotPiecewiseLinear,
    PointOutOfSpace,
    RegionsOverlap,
)

UNIT = IntervalSet.from_pairs([(0, 1)])
HALF = Fraction(1, 2)


@pytest.fixture
def identity():
    return make_pl(UNIT, [0, 1], [0, 1])


class TestIntervalSet:
    def test_union_merges_touching_intervals(self):
        merged = IntervalSet.from_pairs([(0, HALF)]).union(IntervalSet.from_pairs([(HALF, 1)]))
        assert merged == UNIT

    def test_open_pieces_do_not_merge_across_missing_point(self):
        s = IntervalSet.of([open_interval(0, HALF), open_interval(HALF, 1)])
        assert len(s.intervals) == 2
        assert not s.contains(HALF)

    def test_closure_and_interior(self):
        s = IntervalSet.of([open_interval(0, 1)])
        assert s.closure() == UNIT
        assert UNIT.interior() == s
        assert UNIT.interior(relative_to=UNIT) == UNIT

    def test_difference(self):
        left = UNIT.difference(IntervalSet.from_pairs([(HALF, 1)]))
        assert left.contains(0)
        assert not left.contains(HALF)

    def test_empty_interval_rejected(self):
        with pytest.raises(InstanceFormatError):
            open_interval(1, 1)


class TestPLFunction:
    def test_evaluation_interpolates(self, identity):
        assert identity(Fraction(3, 8)) == Fraction(3, 8)

    def test_point_outside_domain(self, identity):
        with pytest.raises(PointOutOfSpace):
            identity(2)

    def test_breakpoints_must_cover_domain_ends(self):
        with pytest.raises(InstanceFormatError):
            make_pl(UNIT, [0, HALF], [0, 1])

    def test_identity_support(self, identity):
        assert pl_support(identity) == UNIT
        assert pl_zero_set(identity).is_empty()

    def test_sigma_of_tent_is_open_support(self):
        f = tent(UNIT, HALF, closed(Fraction(1, 4), Fraction(3, 4)))
        assert pl_sigma(f) == IntervalSet.of([open_interval(Fraction(1, 4), Fraction(3, 4))])

    def test_sign_change_splits_nonzero_set(self):
        f = make_pl(UNIT, [0, 1], [-1, 1])
        assert pl_support(f) == UNIT
        assert pl_zero_set(f).is_empty()
        assert f(HALF) == 0

    def test_add(self, identity):
        assert pl_add(identity, identity)(HALF) == 1

    def test_quadratic_product_rejected(self, identity):
        with pytest.raises(NotPiecewiseLinear):
            pl_multiply(identity, identity)

    def test_domain_mismatch(self, identity):
        other = make_pl(IntervalSet.from_pairs([(0, 2)]), [0, 2], [0, 2])
        with pytest.raises(DomainMismatch):
            pl_add(identity, other)


class TestPlateau:
    def test_linear_between_regions(self):
        h = plateau(UNIT, IntervalSet.from_pairs([(0, Fraction(1, 4))]), IntervalSet.from_pairs([(HALF, 1)]))
        assert h(Fraction(3, 8)) == HALF
        assert h(0) == 1
        assert h(1) == 0

    def test_overlap(self):
        with pytest.raises(RegionsOverlap):
            plateau(UNIT, IntervalSet.from_pairs([(0, HALF)]), IntervalSet.from_pairs([(Fraction(1, 4), 1)]))

    def test_touching_closures(self):
        ones = IntervalSet.from_pairs([(0, HALF)])
        zeros = IntervalSet.of([open_interval(HALF, 1)])
        with pytest.raises(GapEmpty):
            plateau(UNIT, ones, zeros)


class TestMilgramWitness:
    def test_disjoint_supports(self):
        f = tent(UNIT, Fraction(1, 8), closed(0, Fraction(1, 4)))
        g = tent(UNIT, Fraction(7, 8), closed(Fraction(3, 4), 1))
        result = milgram_witness(f, g)
        assert result.found
        assert pl_equal(pl_multiply(result.witness, f), f)
        assert pl_equal(pl_multiply(result.witness, g), zero_function(UNIT))

    def test_touching_supports_have_no_witness(self):
        f = tent(UNIT, Fraction(1, 4), closed(0, HALF))
        g = tent(UNIT, Fraction(3, 4), closed(HALF, 1))
        result = milgram_witness(f, g)
        assert not result.found
        assert result.common_point == HALF


class TestNorms:
    def test_sup_norm(self):
        assert pl_sup_norm(tent(UNIT, HALF, closed(0, 1), height=3)) == 3

    def test_l1_norm_of_identity(self, identity):
        assert pl_l1_norm(identity, uniform_density(UNIT)) == HALF

    def test_l1_norm_counts_absolute_value(self):
        f = make_pl(UNIT, [0, 1], [-1, 1])
        assert pl_l1_norm(f, uniform_density(UNIT)) == HALF

    def test_weighted_density(self, identity):
        density = make_density([0, HALF, 1], [2, 1])
        # 2 * 1/8 + 1 * 3/8
        assert pl_l1_norm(identity, density) == Fraction(5, 8)

    def test_density_must_be_positive(self):
        with pytest.raises(DensityNotPositive):
            make_density([0, 1], [0])
