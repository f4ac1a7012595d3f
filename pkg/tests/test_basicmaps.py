"""Tests for basic maps, transforms and non-vanishing bijections."""

import pytest

from app.services.basicmaps import (
    GroupTables,
    Signature,
    basic_point_maps,
    build_basic,
    check_signature_correspondence,
    extract_transform,
    group_basic_criterion,
    identity_map,
    is_nonvanishing,
    is_phi_basic,
    make_map,
    nonvanishing_counterexample,
    nonvanishing_to_homeo,
    section_flags,
    unique_basic_phi,
)
from app.services.funcrel import full_family
from app.utils.errors import (
    InstanceFormatError,
    NotBasic,
    NotGroupFamily,
    NotNonvanishing,
    SectionDomainGap,
)

THETA, B_ONLY, A_ONLY, BOTH = range(4)
SWAP = {"a": "b", "b": "a"}
IDENTITY = {"a": "a", "b": "b"}
NEGATE = {"a": {0: 1, 1: 0}, "b": {0: 1, 1: 0}}
MAX = {(s, t): max(s, t) for s in (0, 1) for t in (0, 1)}
XOR = {(s, t): s ^ t for s in (0, 1) for t in (0, 1)}


@pytest.fixture
def binary(two_points):
    return full_family(two_points, (0, 1))


class TestBuildBasic:
    def test_composition_with_swap(self, binary):
        T = build_basic(SWAP, None, binary, binary)
        assert T.mapping == (THETA, A_ONLY, B_ONLY, BOTH)
        assert is_phi_basic(T, SWAP)

    def test_section_gap(self, binary, two_points):
        with pytest.raises(SectionDomainGap):
            build_basic(IDENTITY, {"a": {0: 0}, "b": {0: 0, 1: 1}}, binary, two_points)

    def test_image_outside_target(self, two_points):
        source = full_family(two_points, (0, 1))
        target = full_family(two_points, (0, 1, 2))
        T = build_basic(IDENTITY, {y: {0: 0, 1: 2} for y in ("a", "b")}, source, target)
        assert target.members[T(BOTH)] == (2, 2)
        with pytest.raises(InstanceFormatError):
            build_basic(IDENTITY, {y: {0: 0, 1: 2} for y in ("a", "b")}, source, source)

    def test_constant_sections(self, binary, two_points):
        T = build_basic(IDENTITY, {y: {0: 1, 1: 1} for y in ("a", "b")}, binary, two_points, codomain=(0, 1))
        assert set(T.mapping) == {T(THETA)}
        flags = section_flags(T, IDENTITY)
        assert not flags["a"]["injective"]


class TestTransform:
    def test_extract_negation(self, binary, two_points):
        T = build_basic(SWAP, NEGATE, binary, two_points, codomain=(0, 1))
        chi = extract_transform(T, SWAP)
        assert chi.sections == NEGATE
        assert chi("a", 0) == 1

    def test_section_flags(self, binary):
        flags = section_flags(build_basic(SWAP, None, binary, binary), SWAP)
        assert flags["a"] == {"injective": True, "surjective": True}

    def test_swapping_constants_is_not_basic(self, two_points):
        family = full_family(two_points, (0, 1, 2))
        zero, one = family.index_of((0, 0)), family.index_of((1, 1))
        mapping = list(family.indices)
        mapping[zero], mapping[one] = one, zero
        T = make_map(family, family, mapping)
        with pytest.raises(NotBasic) as exc:
            extract_transform(T, IDENTITY)
        assert exc.value.exit_code == 1
        assert exc.value.witness["y"] == "a"
        assert basic_point_maps(T) == []
        assert unique_basic_phi(T) is None

    def test_unique_phi(self, binary):
        assert unique_basic_phi(build_basic(SWAP, None, binary, binary)) == SWAP
        assert unique_basic_phi(identity_map(binary)) == IDENTITY


class TestSignatures:
    def test_swap_preserves_max(self, binary):
        sig = Signature((("max", 2),), {"max": MAX}, {"max": MAX})
        report = check_signature_correspondence(build_basic(SWAP, None, binary, binary), SWAP, sig)
        assert report.map_preserves and report.sections_preserve

    def test_negation_breaks_max(self, binary, two_points):
        sig = Signature((("max", 2),), {"max": MAX}, {"max": MAX})
        T = build_basic(SWAP, NEGATE, binary, two_points, codomain=(0, 1))
        report = check_signature_correspondence(T, SWAP, sig)
        assert not report.map_preserves
        assert not report.sections_preserve

    def test_arity_mismatch(self):
        with pytest.raises(InstanceFormatError):
            Signature((("max", 1),), {"max": MAX}, {"max": MAX})

    def test_group_kernel_criterion(self, binary):
        groups = GroupTables(XOR, 0, XOR, 0)
        assert group_basic_criterion(build_basic(SWAP, None, binary, binary), SWAP, groups)

    def test_negation_is_not_a_homomorphism(self, binary):
        groups = GroupTables(XOR, 0, XOR, 0)
        T = make_map(binary, binary, [BOTH, A_ONLY, B_ONLY, THETA])
        with pytest.raises(NotGroupFamily):
            group_basic_criterion(T, SWAP, groups)


class TestNonvanishing:
    def test_swap_gives_homeomorphism(self, binary):
        T = build_basic(SWAP, None, binary, binary)
        assert is_nonvanishing(T)
        assert nonvanishing_to_homeo(T) == SWAP

    def test_counterexample(self, binary):
        T = make_map(binary, binary, [THETA, BOTH, A_ONLY, B_ONLY])
        assert not is_nonvanishing(T)
        assert nonvanishing_counterexample(T) is not None
        with pytest.raises(NotNonvanishing):
            nonvanishing_to_homeo(T)
