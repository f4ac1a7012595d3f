"""Tests for lattice, additive and linear weighted-composition decompositions."""

from fractions import Fraction

import pytest

from app.services.basicmaps import BlackBoxMap
from app.services.classify import (
    additive_decompose,
    kaplansky_recover_phi,
    kaplansky_restrict,
    l1_disjointness,
    make_chain_family,
    weighted_decompose,
)
from app.services.fintop import discrete_space
from app.services.funcrel import full_family, make_discrete_family
from app.utils.errors import (
    DensityNotPositive,
    HypothesisFailed,
    InstanceFormatError,
    NotBijection,
)
from app.utils.exact import I, GaussianRational

ZERO, ONE = GaussianRational(0), GaussianRational(1)
SWAP = {"a": "b", "b": "a"}


def image_map(source, transform):
    """Map member i to the row ``transform(row_i)`` in a freshly built target family."""
    rows = [tuple(transform(row)) for row in source.members]
    codomain = list(dict.fromkeys(v for row in rows for v in row))
    target = make_discrete_family(source.space, codomain, rows, source.theta_index)
    return BlackBoxMap(source, target, tuple(source.indices))


def swapped(row):
    return row[1], row[0]


@pytest.fixture
def gaussian_space():
    return discrete_space([0, 1])


@pytest.fixture
def gaussian_family(gaussian_space):
    rows = [(ZERO, ZERO), (ONE, ZERO), (ZERO, ONE), (ONE, ONE)]
    return make_discrete_family(gaussian_space, [ZERO, ONE], rows, 0)


def twisted_swap(family, unit=I, scale=1):
    return image_map(family, lambda row: (unit * scale * row[1], unit * scale * row[0]))


class TestChainFamilies:
    def test_product_of_chains(self, two_points):
        family = make_chain_family(two_points, [(0, 0), (0, 1), (1, 0), (1, 1)])
        assert family.members[family.theta_index] == (0, 0)

    def test_not_a_sublattice(self, two_points):
        with pytest.raises(InstanceFormatError):
            make_chain_family(two_points, [(0, 1), (1, 0)])

    def test_non_integer_value(self, two_points):
        with pytest.raises(InstanceFormatError):
            make_chain_family(two_points, [(0, Fraction(1, 2))])

    def test_needs_discrete_space(self, sierpinski):
        with pytest.raises(InstanceFormatError):
            make_chain_family(sierpinski, [(0, 0)])


class TestKaplansky:
    @pytest.fixture
    def lattice_map(self, two_points):
        source = full_family(two_points, (-1, 0, 1), theta_value=-1)
        order = {-1: 0, 0: 1, 1: 5}
        return image_map(source, lambda row: (order[row[1]], order[row[0]]))

    def test_recovers_swap(self, lattice_map):
        assert kaplansky_recover_phi(lattice_map) == SWAP

    def test_restriction_above_theta(self, lattice_map):
        report = kaplansky_restrict(lattice_map, lattice_map.source.theta_index)
        assert report.verified
        assert report.g0 == lattice_map.target.theta_index

    def test_restriction_above_middle(self, lattice_map):
        f0 = lattice_map.source.index_of((0, 0))
        report = kaplansky_restrict(lattice_map, f0)
        assert report.verified
        assert len(report.source_members) == 4


class TestAdditive:
    def test_doubling_weight(self, two_points):
        source = full_family(two_points, (0, 1, 2))
        T = image_map(source, lambda row: tuple(2 * v for v in swapped(row)))
        result = additive_decompose(T)
        assert result.phi == SWAP
        assert result.p == {"a": 2, "b": 2}

    def test_squaring_is_not_additive(self, two_points):
        source = full_family(two_points, (0, 1, 2))
        T = image_map(source, lambda row: tuple(v * v for v in swapped(row)))
        with pytest.raises(HypothesisFailed) as exc_info:
            additive_decompose(T)
        assert exc_info.value.which == "additive"


class TestWeightedDecompose:
    def test_l1_isometry(self, gaussian_family):
        result = weighted_decompose(
            twisted_swap(gaussian_family), "l1", source_density={0: 1, 1: 2}, target_density={0: 2, 1: 1}
        )
        assert result.phi == {0: 1, 1: 0}
        assert result.ratio == {0: 1, 1: 1}
        assert result.unit == {0: I, 1: I}

    def test_l1_ratio_different_from_one(self, gaussian_family):
        result = weighted_decompose(
            twisted_swap(gaussian_family, scale=2), "l1", source_density={0: 2, 1: 4}, target_density={0: 2, 1: 1}
        )
        assert result.ratio == {0: 2, 1: 2}
        assert result.p[0] == 2 * I

    def test_l1_wrong_target_density(self, gaussian_family):
        with pytest.raises(HypothesisFailed) as exc_info:
            weighted_decompose(
                twisted_swap(gaussian_family), "l1", source_density={0: 1, 1: 2}, target_density={0: 1, 1: 1}
            )
        assert exc_info.value.which == "l1-isometry"

    def test_l1_missing_density(self, gaussian_family):
        with pytest.raises(DensityNotPositive):
            weighted_decompose(twisted_swap(gaussian_family), "l1", source_density={0: 1, 1: 2})

    @pytest.mark.parametrize("mode", ["banachstone", "liwong", "jarosz"])
    def test_unimodular_swap(self, gaussian_family, mode):
        result = weighted_decompose(twisted_swap(gaussian_family), mode)
        assert result.phi == {0: 1, 1: 0}
        assert result.p == {0: I, 1: I}

    def test_scaled_map_is_not_sup_isometric(self, gaussian_family):
        with pytest.raises(HypothesisFailed):
            weighted_decompose(twisted_swap(gaussian_family, scale=2), "banachstone")

    def test_scaled_map_preserves_nonvanishing(self, gaussian_family):
        result = weighted_decompose(twisted_swap(gaussian_family, scale=2), "liwong")
        assert result.p == {0: 2 * I, 1: 2 * I}

    def test_not_bijective(self, gaussian_family):
        T = twisted_swap(gaussian_family)
        collapsed = BlackBoxMap(T.source, T.target, (0, 0, 0, 0))
        with pytest.raises(NotBijection):
            weighted_decompose(collapsed, "banachstone")

    def test_unknown_mode(self, gaussian_family):
        with pytest.raises(InstanceFormatError):
            weighted_decompose(twisted_swap(gaussian_family), "sup")


class TestL1Disjointness:
    def test_disjoint_pair(self):
        report = l1_disjointness([1, 0], [0, I], [1, 3])
        assert report.disjoint
        assert report.violating_probe is None
        assert all(report.identity_holds.values())

    def test_overlapping_pair(self):
        report = l1_disjointness([1], [1], [1])
        assert not report.disjoint
        assert report.violating_probe == (ONE, I)

    def test_overlap_on_one_point(self):
        report = l1_disjointness([1, 2], [0, 3], [Fraction(1, 2), 2])
        assert not report.disjoint
        assert report.identity_holds[0, 0]

    def test_density_must_be_positive(self):
        with pytest.raises(DensityNotPositive):
            l1_disjointness([1], [0], [0])

    def test_length_mismatch(self):
        with pytest.raises(InstanceFormatError):
            l1_disjointness([1, 0], [0], [1, 1])
