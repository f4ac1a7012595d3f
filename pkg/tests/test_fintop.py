"""Tests for finite topological spaces and their regular open algebras."""

import pytest

from app.services.fintop import (
    all_topologies,
    chain_space,
    closure,
    discrete_space,
    interior,
    is_dense,
    is_hausdorff,
    is_regular_open,
    is_regular_space,
    make_space,
    regularize,
    restrict_ro,
    ro_algebra,
    space_from_basis,
    subspace,
)
from app.utils.errors import PointOutOfSpace, TopologyInvalid


class TestMakeSpace:
    def test_union_not_open(self):
        with pytest.raises(TopologyInvalid) as exc:
            make_space({"a", "b"}, [set(), {"a"}, {"b"}])
        assert exc.value.exit_code == 2

    def test_missing_empty_set(self):
        with pytest.raises(TopologyInvalid):
            make_space({"a"}, [{"a"}])

    def test_stray_point(self):
        with pytest.raises(TopologyInvalid):
            make_space({"a"}, [set(), {"a"}, {"z"}])

    def test_basis_generates_intersections(self):
        X = space_from_basis([0, 1, 2], [{0, 1}, {1, 2}])
        assert X.is_open({1})
        assert X.is_open({0, 1, 2})
        assert not X.is_open({0})

    def test_three_point_topology_count(self):
        assert len(all_topologies([0, 1, 2])) == 29


class TestOperators:
    def test_sierpinski_closed_point(self, sierpinski):
        assert closure(sierpinski, {"b"}) == {"b"}
        assert interior(sierpinski, {"b"}) == frozenset()
        assert regularize(sierpinski, {"b"}) == frozenset()

    def test_sierpinski_open_point(self, sierpinski):
        assert closure(sierpinski, {"a"}) == {"a", "b"}
        assert regularize(sierpinski, {"a"}) == {"a", "b"}
        assert not is_regular_open(sierpinski, {"a"})

    def test_regularize_is_idempotent(self):
        for X in all_topologies(["p", "q", "r"]):
            for u in X.opens:
                r = regularize(X, u)
                assert regularize(X, r) == r
                assert u <= r

    def test_point_outside_space(self, sierpinski):
        with pytest.raises(PointOutOfSpace):
            closure(sierpinski, {"z"})

    def test_separation(self, sierpinski, two_points):
        assert is_hausdorff(two_points)
        assert not is_hausdorff(sierpinski)
        assert is_regular_space(two_points)
        assert not is_regular_space(sierpinski)


class TestRegularOpenAlgebra:
    def test_sierpinski_is_trivial(self, sierpinski):
        algebra = ro_algebra(sierpinski)
        assert set(algebra.carrier) == {frozenset(), frozenset({"a", "b"})}

    def test_discrete_two_points(self, two_points):
        assert len(ro_algebra(two_points)) == 4

    def test_chain_has_two_regular_opens(self):
        assert len(ro_algebra(chain_space(3))) == 2

    def test_axioms_hold_on_every_small_topology(self):
        for X in all_topologies([0, 1, 2]):
            assert ro_algebra(X).verify_boolean_axioms() == []

    def test_complement(self, three_points):
        algebra = ro_algebra(three_points)
        assert algebra.complement[frozenset({0})] == {1, 2}


class TestRestriction:
    def test_non_dense_open_is_not_isomorphism(self, two_points):
        report = restrict_ro(two_points, {"a"})
        assert not report.dense
        assert not report.is_isomorphism

    def test_dense_open_is_isomorphism(self, sierpinski):
        report = restrict_ro(sierpinski, {"a"})
        assert report.dense
        assert report.is_isomorphism

    def test_section_is_right_inverse(self, three_points):
        report = restrict_ro(three_points, {0, 1})
        for b, a in report.section_map.items():
            assert report.forward_map[a] == b

    def test_subspace_topology(self, sierpinski):
        sub = subspace(sierpinski, {"b"})
        assert sub.opens == {frozenset(), frozenset({"b"})}
        assert is_dense(sierpinski, {"a"})
        assert not is_dense(discrete_space([1, 2]), {1})
