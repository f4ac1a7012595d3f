"""Tests for Steinberg algebras, normalizers, cocycles and automorphisms."""

import pytest

from app.services.steinberg import (
    RingSpec,
    additive_automorphisms,
    algebra_map_from_function,
    all_cocycles,
    bisections,
    build_cocycle_map,
    cocycle_properties,
    condition_S_check,
    convolve,
    cyclic_group,
    decompose_diagonal_preserving,
    diagonal,
    enumerate_aut,
    establish_local_bisection,
    identity_cocycle,
    identity_map,
    indicator,
    inner_map,
    is_normalizer,
    is_topologically_principal,
    local_bisection_check,
    make_element,
    make_groupoid,
    normalizer_inclusion,
    pair_groupoid,
    scale_element,
    trivial_groupoid,
    unit_element,
)
from app.config import settings
from app.utils.errors import (
    DecompositionFailed,
    GroupoidAxiomViolation,
    HypothesisFailed,
    InstanceFormatError,
    NotBijection,
    NotRingIso,
)

Z2, Z3, Z5, Z6 = (RingSpec.modular(n) for n in (2, 3, 5, 6))
SWAP_ARROWS = {(1, 1): (2, 2), (2, 2): (1, 1), (1, 2): (2, 1), (2, 1): (1, 2)}


@pytest.fixture
def pair2():
    return pair_groupoid([1, 2])


@pytest.fixture
def c2():
    return cyclic_group(2)


def flip(G, R):
    """``1_(1,2) + 1_(2,1)``, the permutation matrix of the pair groupoid."""
    return indicator(G, R, [(1, 2), (2, 1)])


class TestRings:
    def test_units_and_inverses(self):
        assert len(Z5.units()) == 4
        assert Z5.inverse(2) == 3
        assert Z6.inverse(2) is None

    def test_indecomposable(self):
        assert Z5.is_indecomposable
        assert not Z6.is_indecomposable
        assert RingSpec.integer().is_indecomposable

    def test_product_ring(self):
        R = RingSpec.product(2, 3)
        assert len(R.elements) == 6
        assert R.mul((1, 2), (1, 2)) == (1, 1)
        assert str(R) == "Z/2xZ/3"

    def test_bad_modulus(self):
        with pytest.raises(InstanceFormatError):
            RingSpec.modular(1)

    def test_additive_automorphisms(self):
        assert len(additive_automorphisms(Z3)) == 2
        assert len(additive_automorphisms(Z5)) == 4
        assert len(additive_automorphisms(RingSpec.integer())) == 2


class TestGroupoids:
    def test_pair_groupoid_units(self, pair2):
        assert set(pair2.units) == {(1, 1), (2, 2)}
        assert pair2.inverse[(1, 2)] == (2, 1)
        assert pair2.source[(1, 2)] == (2, 2)

    def test_missing_product(self):
        with pytest.raises(GroupoidAxiomViolation):
            make_groupoid(["e", "g"], {"e": "e", "g": "e"}, {"e": "e", "g": "e"}, {("e", "e"): "e", ("g", "g"): "e"})

    def test_bisections(self, pair2):
        assert len(bisections(pair2)) == 7

    def test_principal(self, pair2, c2):
        assert is_topologically_principal(pair2)
        assert not is_topologically_principal(c2)


class TestConvolution:
    def test_matrix_units(self, pair2):
        product = convolve(indicator(pair2, Z5, [(1, 2)]), indicator(pair2, Z5, [(2, 1)]), pair2, Z5)
        assert product == indicator(pair2, Z5, [(1, 1)])

    def test_non_composable_product_vanishes(self, pair2):
        product = convolve(indicator(pair2, Z5, [(1, 2)]), indicator(pair2, Z5, [(1, 2)]), pair2, Z5)
        assert not any(product)

    def test_zero_divisors_in_group_ring(self, c2):
        plus = make_element(c2, Z3, {0: 1, 1: 1})
        minus = make_element(c2, Z3, {0: 1, 1: -1})
        assert convolve(plus, minus, c2, Z3) == (0, 0)

    def test_unit_element(self, pair2):
        f = make_element(pair2, Z3, {(1, 2): 2, (2, 2): 1})
        one = unit_element(pair2, Z3)
        assert convolve(one, f, pair2, Z3) == f
        assert convolve(f, one, pair2, Z3) == f

    def test_diagonal(self, pair2):
        D = diagonal(pair2, Z3)
        assert D.contains(unit_element(pair2, Z3))
        assert not D.contains(flip(pair2, Z3))


class TestNormalizers:
    def test_flip_is_its_own_relative_inverse(self, pair2):
        verdict = is_normalizer(flip(pair2, Z3), pair2, Z3)
        assert verdict
        assert verdict.relative_inverse == flip(pair2, Z3)
        assert verdict.method == "structural"

    def test_full_matrix_is_not_a_normalizer(self, pair2):
        everything = indicator(pair2, Z2, pair2.elements)
        assert not is_normalizer(everything, pair2, Z2)

    @pytest.mark.parametrize("ring", [Z2, Z3])
    def test_local_bisection_pair_groupoid(self, pair2, ring):
        report = local_bisection_check(pair2, ring)
        assert report.holds
        assert report.values_invertible
        assert report.normalizers > 0

    def test_inclusion_and_factorization(self, pair2):
        single = indicator(pair2, Z3, [(1, 2)])
        assert normalizer_inclusion(single, flip(pair2, Z3), pair2, Z3).supports_included
        assert not normalizer_inclusion(flip(pair2, Z3), single, pair2, Z3).supports_included


class TestConditionS:
    def test_holds_over_z3(self, c2):
        report = condition_S_check(c2, Z3)
        assert report.holds
        assert report.units_per_point == {"0": 4}

    def test_fails_over_z5(self, c2):
        report = condition_S_check(c2, Z5)
        assert not report.holds
        assert report.units_per_point == {"0": 16}
        assert report.nontrivial["0"]


class TestCocycles:
    def test_identity_cocycle_properties(self, pair2):
        props = cocycle_properties(identity_cocycle(pair2, Z3))
        assert all(props.values())

    def test_pair_groupoid_cocycles_over_z3(self, pair2):
        cocycles = all_cocycles(pair2, Z3)
        assert len(cocycles) == 2
        for chi in cocycles:
            assert all(cocycle_properties(chi).values())

    def test_cyclic_group_cocycles_are_characters(self):
        assert len(all_cocycles(cyclic_group(4), Z5)) == 4


class TestDecomposition:
    def test_identity(self, pair2):
        result = decompose_diagonal_preserving(identity_map(pair2, Z5))
        assert result.phi == {a: a for a in pair2.elements}

    def test_inner_automorphism(self, pair2):
        result = decompose_diagonal_preserving(inner_map(flip(pair2, Z3), pair2, Z3))
        assert result.phi == SWAP_ARROWS

    def test_round_trip_through_cocycle_map(self, pair2):
        for chi in all_cocycles(pair2, Z3):
            T = build_cocycle_map(SWAP_ARROWS, chi, pair2, Z3, pair2, Z3)
            back = decompose_diagonal_preserving(T)
            assert back.phi == SWAP_ARROWS
            assert back.chi.key() == chi.key()

    def test_decomposable_ring(self, pair2):
        with pytest.raises(DecompositionFailed):
            decompose_diagonal_preserving(identity_map(pair2, Z6))

    def test_not_multiplicative(self, pair2):
        doubled = algebra_map_from_function(pair2, Z3, pair2, Z3, lambda f: scale_element(Z3, 2, f))
        with pytest.raises(NotRingIso):
            decompose_diagonal_preserving(doubled)

    def test_bad_arrow_map(self, pair2):
        with pytest.raises(NotBijection):
            build_cocycle_map({(1, 1): (1, 1)}, identity_cocycle(pair2, Z3), pair2, Z3, pair2, Z3)


class TestAutomorphisms:
    def test_trivial_groupoid(self):
        group = enumerate_aut(trivial_groupoid(), Z3)
        assert group.order == 1

    @pytest.mark.parametrize("ring, order", [(Z2, 2), (Z3, 4)])
    def test_pair_groupoid(self, pair2, ring, order):
        group = enumerate_aut(pair2, ring)
        assert group.order == order
        assert group.is_semidirect
        assert group.exhaustive_count == order
        assert group.groupoid_automorphisms == 2

    def test_without_cross_check(self, c2):
        group = enumerate_aut(c2, Z3, cross_check=False)
        assert group.exhaustive_count is None
        assert group.order == group.cocycles * group.groupoid_automorphisms

    def test_skipped_product_rule_is_unknown(self, pair2, monkeypatch):
        monkeypatch.setattr(settings, "ENUMERATION_CAP", 3)
        group = enumerate_aut(pair2, Z2, cross_check=False)
        assert group.order == 2
        assert group.is_semidirect is None


class TestLocalBisectionPrecondition:
    @pytest.fixture
    def c4(self):
        return cyclic_group(4)

    def test_routes(self, pair2, c2):
        assert establish_local_bisection(pair2, Z5) == "principal"
        assert establish_local_bisection(c2, Z3) == "condition_s"

    def test_group_ring_with_idempotents_fails(self, c2):
        with pytest.raises(HypothesisFailed) as exc:
            establish_local_bisection(c2, Z5)
        assert exc.value.which == "local_bisection"
        assert len(exc.value.witness["support"]) > 1

    def test_automorphisms_of_cyclic_group_over_z5(self, c4):
        with pytest.raises(HypothesisFailed) as exc:
            enumerate_aut(c4, Z5)
        assert exc.value.witness["normalizer"] is not None

    def test_decompose_names_the_normalizer(self, c4):
        with pytest.raises(DecompositionFailed) as exc:
            decompose_diagonal_preserving(identity_map(c4, Z5))
        assert exc.value.witness["side"] == "source"
        assert len(exc.value.witness["support"]) > 1

    def test_declared_hypothesis(self, c4):
        result = decompose_diagonal_preserving(identity_map(c4, Z5), hypothesis_declared=True)
        assert result.phi == {a: a for a in c4.elements}
