"""Tests for Haar systems, weighted convolution and isometric decompositions."""

from fractions import Fraction

import pytest

from app.services.haarconv import (
    basis_element,
    build_measured_map,
    counting_system,
    ir_norm,
    is_etale_constant,
    l1_norm,
    make_element,
    make_measure,
    radon_nikodym,
    validate_haar,
    verify_ir_decomposition,
    verify_measured_decomposition,
    weighted_convolve,
)
from app.services.steinberg import cyclic_group, pair_groupoid
from app.utils.errors import (
    HypothesisFailed,
    InstanceFormatError,
    InvarianceViolation,
    NotBijection,
    NotFullySupported,
)
from app.utils.exact import I, GaussianRational

SWAP_ARROWS = {(1, 1): (2, 2), (2, 2): (1, 1), (1, 2): (2, 1), (2, 1): (1, 2)}


@pytest.fixture
def pair2():
    return pair_groupoid([1, 2])


@pytest.fixture
def counting(pair2):
    return counting_system(pair2)


@pytest.fixture
def uniform(pair2):
    return make_measure(pair2, {(1, 1): 1, (2, 2): 1})


def identity_arrows(G):
    return {a: a for a in G.elements}


class TestHaarSystems:
    def test_source_dependent_weights_are_invariant(self, pair2):
        system = validate_haar(pair2, {(x, y): y for x, y in pair2.elements})
        assert system((1, 2)) == 2
        assert is_etale_constant(system)

    def test_range_dependent_weights_fail(self, pair2):
        with pytest.raises(InvarianceViolation):
            validate_haar(pair2, {(x, y): x for x, y in pair2.elements})

    def test_non_positive_weight(self, pair2):
        weights = {a: 1 for a in pair2.elements}
        weights[(1, 1)] = 0
        with pytest.raises(NotFullySupported):
            validate_haar(pair2, weights)

    def test_missing_weight(self, pair2):
        with pytest.raises(InstanceFormatError):
            validate_haar(pair2, {(1, 1): 1})

    def test_group_weights_are_constant(self):
        C3 = cyclic_group(3)
        assert counting_system(C3)(1) == 1
        with pytest.raises(InvarianceViolation):
            validate_haar(C3, {0: 1, 1: 2, 2: 1})

    def test_measure_on_units_only(self, pair2):
        with pytest.raises(InstanceFormatError):
            make_measure(pair2, {(1, 1): 1})
        with pytest.raises(NotFullySupported):
            make_measure(pair2, {(1, 1): 1, (2, 2): -1})


class TestConvolutionAndNorms:
    def test_counting_convolution_is_matrix_product(self, pair2, counting):
        product = weighted_convolve(basis_element(pair2, (1, 2)), basis_element(pair2, (2, 1)), pair2, counting)
        assert product == basis_element(pair2, (1, 1))

    def test_weights_scale_the_product(self, pair2):
        system = validate_haar(pair2, {(x, y): 1 if y == 1 else 3 for x, y in pair2.elements})
        product = weighted_convolve(basis_element(pair2, (1, 2)), basis_element(pair2, (2, 1)), pair2, system)
        assert product == basis_element(pair2, (1, 1), 3)

    def test_norms_of_constant_function(self, pair2, counting, uniform):
        ones = make_element(pair2, {a: 1 for a in pair2.elements})
        assert l1_norm(ones, counting, uniform) == 4
        assert ir_norm(ones, counting) == 2

    def test_norms_use_modulus(self, pair2, counting, uniform):
        f = make_element(pair2, {(1, 1): GaussianRational(3, 4), (2, 1): -1})
        assert l1_norm(f, counting, uniform) == 6
        assert ir_norm(f, counting) == 5


class TestRadonNikodym:
    def test_doubled_target_weights(self, pair2, counting):
        doubled = validate_haar(pair2, {a: 2 for a in pair2.elements})
        D = radon_nikodym(identity_arrows(pair2), counting, doubled)
        assert set(D.values()) == {Fraction(1, 2)}

    def test_scaled_source_weights(self, pair2, counting):
        tripled = validate_haar(pair2, {a: 3 for a in pair2.elements})
        D = radon_nikodym(identity_arrows(pair2), tripled, counting)
        assert set(D.values()) == {3}

    def test_bad_arrow_map(self, counting):
        with pytest.raises(NotBijection):
            build_measured_map({(1, 1): (1, 1)}, {(1, 1): 1}, counting, counting)


class TestMeasuredDecomposition:
    def test_rescaled_haar_system(self, pair2, counting, uniform):
        doubled = validate_haar(pair2, {a: 2 for a in pair2.elements})
        phi = identity_arrows(pair2)
        p = {h: 1 for h in pair2.elements}
        T = build_measured_map(phi, p, counting, doubled)
        report = verify_measured_decomposition(T, uniform, uniform, declared=(phi, p))
        assert report.verified
        assert report.phi == phi
        assert set(report.D.values()) == {Fraction(1, 2)}
        assert report.checks["declared_data"]

    def test_swap_pushes_measure(self, pair2, counting):
        mu_g = make_measure(pair2, {(1, 1): 1, (2, 2): 2})
        mu_h = make_measure(pair2, {(1, 1): 2, (2, 2): 1})
        T = build_measured_map(SWAP_ARROWS, {h: 1 for h in pair2.elements}, counting, counting)
        report = verify_measured_decomposition(T, mu_g, mu_h)
        assert report.verified
        assert report.checks["measure_pushforward"]
        assert report.phi == SWAP_ARROWS

    def test_measure_mismatch_is_not_isometric(self, pair2, counting):
        mu = make_measure(pair2, {(1, 1): 1, (2, 2): 2})
        T = build_measured_map(SWAP_ARROWS, {h: 1 for h in pair2.elements}, counting, counting)
        with pytest.raises(HypothesisFailed):
            verify_measured_decomposition(T, mu, mu)

    def test_phase_twist(self, pair2, counting, uniform):
        phase = {1: I, 2: GaussianRational(1)}
        p = {(x, y): phase[x] / phase[y] for x, y in pair2.elements}
        T = build_measured_map(identity_arrows(pair2), p, counting, counting)
        report = verify_measured_decomposition(T, uniform, uniform)
        assert report.verified
        assert report.p[(1, 2)] == I
        assert report.p[(2, 1)] == -I

    def test_non_morphism_phase(self, pair2, counting, uniform):
        p = {h: 1 for h in pair2.elements}
        p[(1, 2)] = I
        T = build_measured_map(identity_arrows(pair2), p, counting, counting)
        with pytest.raises(HypothesisFailed):
            verify_measured_decomposition(T, uniform, uniform)

    def test_scaled_image(self, pair2, counting, uniform):
        T = build_measured_map(identity_arrows(pair2), {h: 1 for h in pair2.elements}, counting, counting)
        image = T.images[(1, 2)]
        broken = T.with_image((1, 2), tuple(v + v for v in image))
        with pytest.raises(HypothesisFailed):
            verify_measured_decomposition(broken, uniform, uniform)


class TestIRDecomposition:
    def test_rescaled_haar_system(self, pair2, counting):
        doubled = validate_haar(pair2, {a: 2 for a in pair2.elements})
        phi = identity_arrows(pair2)
        T = build_measured_map(phi, {h: 1 for h in pair2.elements}, counting, doubled)
        report = verify_ir_decomposition(T, declared=(phi, {h: 1 for h in pair2.elements}))
        assert report.verified
        assert report.norm == "ir"
        assert "measure_pushforward" not in report.checks

    def test_swap(self, pair2, counting):
        T = build_measured_map(SWAP_ARROWS, {h: 1 for h in pair2.elements}, counting, counting)
        assert verify_ir_decomposition(T).phi == SWAP_ARROWS

    def test_scaled_image(self, pair2, counting):
        T = build_measured_map(identity_arrows(pair2), {h: 1 for h in pair2.elements}, counting, counting)
        broken = T.with_image((1, 1), basis_element(pair2, (1, 1), 2))
        with pytest.raises(HypothesisFailed):
            verify_ir_decomposition(broken)


class TestRejectedMaps:
    @pytest.fixture
    def c2(self):
        return cyclic_group(2)

    def collapsed(self, c2):
        heavy = validate_haar(c2, {0: 2, 1: 2})
        T = build_measured_map({0: 0, 1: 1}, {0: 1, 1: 1}, heavy, counting_system(c2))
        return T.with_image(0, basis_element(c2, 0, 2)).with_image(1, basis_element(c2, 0, 2))

    def test_non_injective_homomorphism_l1(self, c2):
        mu = make_measure(c2, {0: 1})
        with pytest.raises(HypothesisFailed) as exc:
            verify_measured_decomposition(self.collapsed(c2), mu, mu)
        assert exc.value.which == "isomorphism"

    def test_non_injective_homomorphism_ir(self, c2):
        with pytest.raises(HypothesisFailed) as exc:
            verify_ir_decomposition(self.collapsed(c2))
        assert exc.value.which == "isomorphism"

    @pytest.mark.parametrize("target", [(1, 1), (2, 1)])
    def test_moved_mass(self, pair2, counting, uniform, target):
        T = build_measured_map(identity_arrows(pair2), {h: 1 for h in pair2.elements}, counting, counting)
        moved = T.with_image((1, 2), basis_element(pair2, target))
        with pytest.raises(HypothesisFailed):
            verify_measured_decomposition(moved, uniform, uniform)
        with pytest.raises(HypothesisFailed):
            verify_ir_decomposition(moved)

    def test_irrational_modulus_is_not_isometric(self, pair2, counting, uniform):
        c = 1 + I
        T = build_measured_map(identity_arrows(pair2), {h: 1 for h in pair2.elements}, counting, counting)
        twisted = T.with_image((1, 2), basis_element(pair2, (1, 2), c)).with_image((2, 1), basis_element(pair2, (2, 1), 1 / c))
        with pytest.raises(HypothesisFailed) as exc:
            verify_measured_decomposition(twisted, uniform, uniform)
        assert exc.value.which == "isometry"
        with pytest.raises(HypothesisFailed) as exc:
            verify_ir_decomposition(twisted)
        assert exc.value.which == "isometry"
