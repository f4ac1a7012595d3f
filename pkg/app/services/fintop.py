"""
Finite topological spaces.

This module provides validated finite spaces with explicit open sets, the
interior, closure and regularization operators, the Boolean algebra of
regular open sets and the restriction maps to a dense open subspace.
Separation properties are exposed as predicates, never as constructor
preconditions, so non-regular spaces such as the Sierpinski space are
ordinary inputs.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Tuple

from app.utils.errors import NotOpen, PointOutOfSpace, TheoremViolation, TopologyInvalid

logger = logging.getLogger(__name__)

Point = Hashable
PointSet = FrozenSet[Point]


def point_key(point: Point) -> Tuple[str, Any]:
    """Sort key that orders mixed int/str point labels deterministically."""
    return (type(point).__name__, point)


def set_key(subset: Iterable[Point]) -> Tuple[int, Tuple]:
    """Sort key for point sets: by size, then lexicographically."""
    items = tuple(sorted(subset, key=point_key))
    return (len(items), tuple(point_key(p) for p in items))


def sorted_sets(sets: Iterable[PointSet]) -> List[PointSet]:
    return sorted(sets, key=set_key)


@dataclass(frozen=True)
class FiniteSpace:
    """A finite point set together with its family of open sets."""

    points: PointSet
    opens: FrozenSet[PointSet]

    @property
    def ordered_points(self) -> Tuple[Point, ...]:
        return tuple(sorted(self.points, key=point_key))

    @property
    def ordered_opens(self) -> List[PointSet]:
        return sorted_sets(self.opens)

    def is_open(self, subset: Iterable[Point]) -> bool:
        return frozenset(subset) in self.opens

    def is_closed(self, subset: Iterable[Point]) -> bool:
        return (self.points - frozenset(subset)) in self.opens

    def clopens(self) -> List[PointSet]:
        return [u for u in self.ordered_opens if self.is_closed(u)]

    def minimal_neighbourhood(self, point: Point) -> PointSet:
        """Smallest open set containing ``point``."""
        result = self.points
        for u in self.opens:
            if point in u:
                result = result & u
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": list(self.ordered_points),
            "opens": [sorted(u, key=point_key) for u in self.ordered_opens],
        }


def make_space(points: Iterable[Point], opens: Iterable[Iterable[Point]]) -> FiniteSpace:
    """
    Build and validate a finite topological space.

    Args:
        points: Point identifiers
        opens: The open sets

    Returns:
        FiniteSpace: Validated space

    Raises:
        TopologyInvalid: If the empty set or the full set is missing, an open
            set leaves the point set, or unions/intersections are not open
    """
    point_set = frozenset(points)
    open_sets = frozenset(frozenset(u) for u in opens)

    for u in open_sets:
        stray = u - point_set
        if stray:
            raise TopologyInvalid(
                "Open set contains points outside the space",
                {"open": sorted(u, key=point_key), "stray": sorted(stray, key=point_key)},
            )
    if frozenset() not in open_sets:
        raise TopologyInvalid("Empty set is not open", {"missing": []})
    if point_set not in open_sets:
        raise TopologyInvalid("Full point set is not open", {"missing": sorted(point_set, key=point_key)})

    for u, v in combinations(sorted_sets(open_sets), 2):
        if u | v not in open_sets:
            raise TopologyInvalid(
                "Union of open sets is not open",
                {"left": sorted(u, key=point_key), "right": sorted(v, key=point_key), "operation": "union"},
            )
        if u & v not in open_sets:
            raise TopologyInvalid(
                "Intersection of open sets is not open",
                {"left": sorted(u, key=point_key), "right": sorted(v, key=point_key), "operation": "intersection"},
            )

    return FiniteSpace(point_set, open_sets)


def space_from_basis(points: Iterable[Point], basis: Iterable[Iterable[Point]]) -> FiniteSpace:
    """Generate the topology whose opens are the unions of finite intersections of ``basis``."""
    point_set = frozenset(points)
    generators = {frozenset(b) for b in basis} | {point_set}
    intersections = set(generators)
    changed = True
    while changed:
        changed = False
        for u, v in list(combinations(list(intersections), 2)):
            w = u & v
            if w not in intersections:
                intersections.add(w)
                changed = True
    opens = {frozenset()}
    for u in intersections:
        opens |= {v | u for v in opens}
    return make_space(point_set, opens)


def discrete_space(points: Iterable[Point]) -> FiniteSpace:
    point_set = frozenset(points)
    return FiniteSpace(point_set, frozenset(_power_set(point_set)))


def sierpinski_space() -> FiniteSpace:
    return make_space({"a", "b"}, [set(), {"a"}, {"a", "b"}])


def chain_space(n: int) -> FiniteSpace:
    """Alexandrov space of the chain ``0 < 1 < ... < n-1``; opens are up-sets."""
    points = range(n)
    return make_space(points, [set(range(k, n)) for k in range(n + 1)])


def _power_set(points: PointSet) -> Iterator[PointSet]:
    ordered = sorted(points, key=point_key)
    for size in range(len(ordered) + 1):
        for combo in combinations(ordered, size):
            yield frozenset(combo)


def subsets(X: FiniteSpace) -> List[PointSet]:
    """All subsets of the point set, ordered by size then labels."""
    return list(_power_set(X.points))


def all_topologies(points: Iterable[Point]) -> List[FiniteSpace]:
    """
    Enumerate every topology on a small labeled point set.

    Args:
        points: At most four point identifiers

    Returns:
        List[FiniteSpace]: One space per topology (29 for three points)
    """
    point_set = frozenset(points)
    middle = [s for s in _power_set(point_set) if s and s != point_set]
    spaces = []
    for mask in range(1 << len(middle)):
        family = {frozenset(), point_set}
        family.update(middle[i] for i in range(len(middle)) if mask >> i & 1)
        if all(u | v in family and u & v in family for u, v in combinations(family, 2)):
            spaces.append(FiniteSpace(point_set, frozenset(family)))
    logger.debug(f"Enumerated {len(spaces)} topologies on {len(point_set)} points")
    return spaces


def _check_subset(X: FiniteSpace, S: Iterable[Point]) -> PointSet:
    subset = frozenset(S)
    stray = subset - X.points
    if stray:
        raise PointOutOfSpace("Set contains points outside the space", {"points": sorted(stray, key=point_key)})
    return subset


def interior(X: FiniteSpace, S: Iterable[Point]) -> PointSet:
    """Largest open set inside ``S``."""
    subset = _check_subset(X, S)
    result = frozenset()
    for u in X.opens:
        if u <= subset:
            result |= u
    return result


def closure(X: FiniteSpace, S: Iterable[Point]) -> PointSet:
    """Smallest closed set containing ``S``."""
    subset = _check_subset(X, S)
    return X.points - interior(X, X.points - subset)


def regularize(X: FiniteSpace, S: Iterable[Point]) -> PointSet:
    """``int(cl(S))``."""
    return interior(X, closure(X, S))


def is_regular_open(X: FiniteSpace, S: Iterable[Point]) -> bool:
    subset = _check_subset(X, S)
    return regularize(X, subset) == subset


def is_dense(X: FiniteSpace, S: Iterable[Point]) -> bool:
    return closure(X, S) == X.points


def is_discrete(X: FiniteSpace) -> bool:
    return all(frozenset({p}) in X.opens for p in X.points)


def is_hausdorff(X: FiniteSpace) -> bool:
    """Distinct points have disjoint neighbourhoods; for finite spaces this means discrete."""
    for p, q in combinations(X.ordered_points, 2):
        if X.minimal_neighbourhood(p) & X.minimal_neighbourhood(q):
            return False
    return True


def is_regular_space(X: FiniteSpace) -> bool:
    """Every point and closed set not containing it are separated by open sets."""
    for p in X.points:
        for u in X.opens:
            if p in u and not closure(X, X.minimal_neighbourhood(p)) <= u:
                return False
    return True


def subspace(X: FiniteSpace, U: Iterable[Point]) -> FiniteSpace:
    sub = _check_subset(X, U)
    return FiniteSpace(sub, frozenset(u & sub for u in X.opens))


@dataclass(frozen=True)
class RegularOpenAlgebra:
    """Boolean algebra of regular open subsets with its operation tables."""

    space: FiniteSpace
    carrier: Tuple[PointSet, ...]
    meet: Dict[Tuple[PointSet, PointSet], PointSet] = field(compare=False)
    join: Dict[Tuple[PointSet, PointSet], PointSet] = field(compare=False)
    complement: Dict[PointSet, PointSet] = field(compare=False)
    zero: PointSet = frozenset()
    one: PointSet = frozenset()

    def __len__(self) -> int:
        return len(self.carrier)

    def verify_boolean_axioms(self) -> List[str]:
        """
        Check the Boolean-algebra axioms on the operation tables.

        Returns:
            List[str]: Descriptions of violated axioms (empty when valid)
        """
        violations = []
        meet, join, comp = self.meet, self.join, self.complement
        elements = self.carrier
        for a in elements:
            if meet[a, self.one] != a or join[a, self.zero] != a:
                violations.append(f"identity law fails at {sorted(a, key=point_key)}")
            if meet[a, comp[a]] != self.zero or join[a, comp[a]] != self.one:
                violations.append(f"complement law fails at {sorted(a, key=point_key)}")
            for b in elements:
                if meet[a, b] != meet[b, a] or join[a, b] != join[b, a]:
                    violations.append("commutativity fails")
                if meet[a, join[a, b]] != a or join[a, meet[a, b]] != a:
                    violations.append("absorption fails")
                for c in elements:
                    if meet[a, meet[b, c]] != meet[meet[a, b], c]:
                        violations.append("meet associativity fails")
                    if join[a, join[b, c]] != join[join[a, b], c]:
                        violations.append("join associativity fails")
                    if meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]:
                        violations.append("distributivity fails")
        return violations


def ro_algebra(X: FiniteSpace) -> RegularOpenAlgebra:
    """
    Build the Boolean algebra of regular open subsets of ``X``.

    Joins are ``int(cl(A ∪ B))``, meets are intersections and the complement
    of ``A`` is ``int(X ∖ A)``.
    """
    carrier = tuple(s for s in subsets(X) if regularize(X, s) == s)
    meet, join, complement = {}, {}, {}
    for a in carrier:
        complement[a] = interior(X, X.points - a)
        for b in carrier:
            meet[a, b] = a & b
            join[a, b] = regularize(X, a | b)
    algebra = RegularOpenAlgebra(X, carrier, meet, join, complement, frozenset(), X.points)
    violations = algebra.verify_boolean_axioms()
    if violations:
        raise TheoremViolation("Regular open sets do not form a Boolean algebra", {"violations": violations[:5]})
    logger.debug(f"RO algebra has {len(carrier)} elements")
    return algebra


@dataclass(frozen=True)
class RestrictionReport:
    """Restriction of RO(X) to an open subspace and its canonical section."""

    forward_map: Dict[PointSet, PointSet]
    section_map: Dict[PointSet, PointSet]
    is_isomorphism: bool
    dense: bool


def restrict_ro(X: FiniteSpace, U: Iterable[Point]) -> RestrictionReport:
    """
    Compare RO(X) with RO(U) for an open ``U``.

    The forward map is ``A ↦ A ∩ U`` and the section is
    ``B ↦ int_X(cl_X(B))``. The pair is an isomorphism exactly when ``U`` is
    dense.

    Raises:
        NotOpen: If ``U`` is not open in ``X``
        TheoremViolation: If the forward map leaves RO(U) or the section is not
            an order-preserving right inverse
    """
    u_set = _check_subset(X, U)
    if u_set not in X.opens:
        raise NotOpen("Restriction requires an open set", {"set": sorted(u_set, key=point_key)})

    sub = subspace(X, u_set)
    ro_x = ro_algebra(X)
    ro_u = ro_algebra(sub)
    ro_u_set = set(ro_u.carrier)

    forward = {a: a & u_set for a in ro_x.carrier}
    for a, image in forward.items():
        if image not in ro_u_set:
            raise TheoremViolation(
                "Restriction of a regular open set is not regular open in U",
                {"set": sorted(a, key=point_key)},
            )
    section = {b: regularize(X, b) for b in ro_u.carrier}
    for b, c in combinations(ro_u.carrier, 2):
        if b <= c and not section[b] <= section[c]:
            raise TheoremViolation("Section is not order preserving", {"left": sorted(b, key=point_key)})
    for b in ro_u.carrier:
        if forward[section[b]] != b:
            raise TheoremViolation("Section is not a right inverse", {"set": sorted(b, key=point_key)})

    injective = len(set(forward.values())) == len(forward)
    surjective = set(forward.values()) == ro_u_set
    round_trip = all(section[forward[a]] == a for a in ro_x.carrier)
    is_iso = injective and surjective and round_trip
    return RestrictionReport(forward, section, is_iso, is_dense(X, u_set))
