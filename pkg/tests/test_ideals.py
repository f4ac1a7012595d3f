"""Tests for covers, ⊥⊥-ideals, spectra and homeomorphism recovery."""

import pytest

from app.services.basicmaps import build_basic, identity_map, make_map
from app.services.fintop import discrete_space
from app.services.funcrel import full_family, make_discrete_family
from app.services.ideals import (
    all_ideals,
    ideal_of_open,
    is_cover,
    is_perp_ideal,
    is_strong_cover,
    kappa,
    maximal_ideals,
    open_of_ideal,
    perp_iso_check,
    recover_homeo,
    spectrum,
)
from app.utils.errors import HypothesisFailed, NotBijection, NotOpen, NotWeaklyRegular

THETA, B_ONLY, A_ONLY, BOTH = range(4)
SWAP = {"a": "b", "b": "a"}


@pytest.fixture
def binary(two_points):
    return full_family(two_points, (0, 1))


class TestCovers:
    def test_two_indicators_cover_the_constant(self, binary):
        verdict = is_cover([A_ONLY, B_ONLY], BOTH, binary)
        assert verdict
        assert verdict.syntactic

    def test_single_indicator_does_not(self, binary):
        verdict = is_cover([A_ONLY], BOTH, binary)
        assert not verdict
        assert not verdict.syntactic

    def test_strong_cover_with_witness(self, binary):
        verdict = is_strong_cover([BOTH], B_ONLY, binary, search_witness=True)
        assert verdict
        assert verdict.witness_found
        assert B_ONLY in verdict.witness


class TestIdeals:
    def test_empty_open_gives_theta(self, binary):
        assert ideal_of_open(set(), binary).indices == (THETA,)

    def test_ideal_of_point(self, binary):
        assert ideal_of_open({"a"}, binary).indices == (THETA, A_ONLY)

    def test_non_open_set(self, sierpinski):
        family = make_discrete_family(sierpinski, (0, 1), [(0, 0), (1, 0), (1, 1)])
        with pytest.raises(NotOpen):
            ideal_of_open({"b"}, family)

    def test_round_trip(self, binary, two_points):
        for U in two_points.opens:
            assert open_of_ideal(ideal_of_open(U, binary)) == U

    def test_ideals_match_opens(self, binary, two_points):
        assert len(all_ideals(binary)) == len(two_points.opens) == 4

    def test_exhaustive_search_agrees(self, binary):
        assert all_ideals(binary, exhaustive=True) == all_ideals(binary)

    def test_not_an_ideal(self, binary):
        assert not is_perp_ideal([THETA, A_ONLY, B_ONLY], binary)
        assert is_perp_ideal([THETA, B_ONLY], binary)


class TestSpectrum:
    def test_two_point_spectrum(self, binary):
        result = spectrum(binary)
        assert len(result.ideal_points) == 2
        assert result.is_homeomorphism
        assert set(result.kappa) == {"a", "b"}

    def test_maximal_ideals_are_point_complements(self, binary):
        assert {I.indices for I in maximal_ideals(binary)} == {(THETA, A_ONLY), (THETA, B_ONLY)}
        assert kappa("a", binary).indices == (THETA, B_ONLY)

    def test_three_points(self, three_points):
        result = spectrum(full_family(three_points, (0, 1)))
        assert len(result.ideal_points) == 3
        assert result.is_homeomorphism

    def test_not_weakly_regular(self, sierpinski):
        family = make_discrete_family(sierpinski, (0, 1), [(0, 0), (1, 0), (1, 1)])
        with pytest.raises(NotWeaklyRegular):
            spectrum(family)

    def test_kappa_needs_closed_points(self, sierpinski):
        family = make_discrete_family(sierpinski, (0, 1), [(0, 0), (1, 0), (1, 1)])
        with pytest.raises(HypothesisFailed):
            kappa("a", family)


class TestRecoverHomeo:
    def test_identity(self, binary):
        assert recover_homeo(identity_map(binary)) == {"a": "a", "b": "b"}

    def test_swap(self, binary):
        T = build_basic(SWAP, None, binary, binary)
        assert T.mapping == (THETA, A_ONLY, B_ONLY, BOTH)
        assert recover_homeo(T) == SWAP

    def test_swap_with_negating_sections(self, binary, two_points):
        sections = {y: {0: 1, 1: 0} for y in ("a", "b")}
        T = build_basic(SWAP, sections, binary, two_points, codomain=(0, 1))
        assert recover_homeo(T) == SWAP

    def test_three_point_cycle(self, three_points):
        family = full_family(three_points, (0, 1))
        phi = {0: 1, 1: 2, 2: 0}
        assert recover_homeo(build_basic(phi, None, family, three_points)) == phi

    def test_not_bijective(self, binary):
        with pytest.raises(NotBijection):
            recover_homeo(make_map(binary, binary, [0, 0, 0, 0]))

    def test_perp_iso_laws(self, binary):
        assert perp_iso_check(build_basic(SWAP, None, binary, binary)) == []

    def test_perp_iso_hypothesis(self, binary):
        T = make_map(binary, binary, [THETA, BOTH, A_ONLY, B_ONLY])
        with pytest.raises(HypothesisFailed):
            perp_iso_check(T)
