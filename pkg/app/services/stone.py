"""
Finite Boolean algebras and Stone duality.

Finite generalized Boolean algebras always have a top, so they are stored
as Boolean algebras given by operation tables with the relative
complement kept as a separate table. Ultrafilters of a finite algebra are
the principal filters of its atoms.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

from app.config import settings
from app.services.fintop import (
    FiniteSpace,
    PointSet,
    discrete_space,
    point_key,
    ro_algebra,
    sorted_sets,
    space_from_basis,
)
from app.utils.errors import (
    EnumerationCapExceeded,
    InstanceFormatError,
    NotZeroDimensional,
    TrivialAlgebra,
)

logger = logging.getLogger(__name__)

Element = Hashable


@dataclass(frozen=True, eq=False)
class GenBoolAlg:
    """A finite generalized Boolean algebra given by its tables."""

    elements: Tuple[Element, ...]
    meet: Dict[Tuple[Element, Element], Element]
    join: Dict[Tuple[Element, Element], Element]
    zero: Element
    relative_complement: Dict[Tuple[Element, Element], Element] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.elements)

    def leq(self, a: Element, b: Element) -> bool:
        return self.meet[a, b] == a

    def diff(self, b: Element, a: Element) -> Element:
        """``b ∖ a`` for ``a ≤ b``."""
        return self.relative_complement[b, a]

    @property
    def top(self) -> Element:
        top = self.zero
        for a in self.elements:
            top = self.join[top, a]
        return top

    def atoms(self) -> List[Element]:
        """Minimal nonzero elements, in element order."""
        nonzero = [a for a in self.elements if a != self.zero]
        return [a for a in nonzero if not any(b != a and self.leq(b, a) for b in nonzero)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "elements": [_label(a) for a in self.elements],
            "zero": _label(self.zero),
            "atoms": [_label(a) for a in self.atoms()],
        }


def _label(a: Element) -> Any:
    if isinstance(a, frozenset):
        return sorted(a, key=point_key)
    return a


def _table_violations(elements: Tuple, meet: Dict, join: Dict, zero: Element) -> List[str]:
    violations = []
    for a in elements:
        if meet[a, zero] != zero or join[a, zero] != a:
            violations.append(f"zero is not the bottom at {_label(a)}")
        if meet[a, a] != a or join[a, a] != a:
            violations.append(f"idempotence fails at {_label(a)}")
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


def make_algebra(
    elements: Iterable[Element],
    meet: Mapping[Tuple[Element, Element], Element],
    join: Mapping[Tuple[Element, Element], Element],
    zero: Element,
    relative_complement: Optional[Mapping[Tuple[Element, Element], Element]] = None,
) -> GenBoolAlg:
    """
    Validate tables and complete the relative complement.

    Raises:
        InstanceFormatError: If a table is partial, the lattice or
            distributive laws fail, or a relative complement is missing or wrong
    """
    elements = tuple(elements)
    if zero not in elements:
        raise InstanceFormatError("Zero is not an element", {"zero": _label(zero)})
    for name, table in (("meet", meet), ("join", join)):
        for a in elements:
            for b in elements:
                if table.get((a, b)) not in elements:
                    raise InstanceFormatError(f"{name} table is partial", {"left": _label(a), "right": _label(b)})
    meet, join = dict(meet), dict(join)
    violations = _table_violations(elements, meet, join, zero)
    if violations:
        raise InstanceFormatError("Tables do not form a distributive lattice", {"violations": violations[:5]})

    given = dict(relative_complement or {})
    complements = {}
    for b in elements:
        for a in elements:
            if meet[a, b] != a:
                continue
            candidates = [c for c in elements if join[a, c] == b and meet[a, c] == zero]
            if len(candidates) != 1:
                raise InstanceFormatError("Relative complement is not unique", {"b": _label(b), "a": _label(a)})
            if (b, a) in given and given[b, a] != candidates[0]:
                raise InstanceFormatError("Relative complement table is wrong", {"b": _label(b), "a": _label(a)})
            complements[b, a] = candidates[0]
    return GenBoolAlg(elements, meet, join, zero, complements)


def power_set_algebra(atoms: Iterable[Hashable]) -> GenBoolAlg:
    """All subsets of ``atoms`` under intersection and union."""
    base = discrete_space(atoms)
    return _set_algebra(sorted_sets(base.opens))


def _set_algebra(carrier: List[PointSet]) -> GenBoolAlg:
    meet = {(a, b): a & b for a in carrier for b in carrier}
    join = {(a, b): a | b for a in carrier for b in carrier}
    diff = {(b, a): b - a for a in carrier for b in carrier if a <= b}
    return GenBoolAlg(tuple(carrier), meet, join, frozenset(), diff)


def algebra_from_ro(X: FiniteSpace) -> GenBoolAlg:
    """The regular open algebra of ``X`` as a generalized Boolean algebra."""
    ro = ro_algebra(X)
    diff = {(b, a): ro.meet[b, ro.complement[a]] for a in ro.carrier for b in ro.carrier if a <= b}
    return GenBoolAlg(ro.carrier, dict(ro.meet), dict(ro.join), ro.zero, diff)


def ultrafilters(B: GenBoolAlg) -> List[frozenset]:
    """Principal filters of the atoms, in atom order."""
    return [frozenset(b for b in B.elements if B.leq(a, b)) for a in B.atoms()]


def spec(B: GenBoolAlg) -> FiniteSpace:
    """
    Space of ultrafilters; points are atom positions and ``[a]`` are the basic opens.

    Raises:
        TrivialAlgebra: If B has a single element
    """
    if len(B) < 2:
        raise TrivialAlgebra("Algebra has no ultrafilters", {"elements": len(B)})
    filters = ultrafilters(B)
    points = range(len(filters))
    basis = [frozenset(i for i in points if a in filters[i]) for a in B.elements]
    space = space_from_basis(points, basis)
    logger.debug(f"Spec has {len(filters)} points")
    return space


def ko(X: FiniteSpace) -> GenBoolAlg:
    """
    Compact-open (here: clopen) subsets of a zero-dimensional finite space.

    Raises:
        NotZeroDimensional: If some open set is not a union of clopens
    """
    clopens = X.clopens()
    for u in X.ordered_opens:
        covered = frozenset().union(*[c for c in clopens if c <= u])
        if covered != u:
            raise NotZeroDimensional(
                "Clopen sets do not form a basis",
                {"open": sorted(u, key=point_key), "clopen_part": sorted(covered, key=point_key)},
            )
    return _set_algebra(clopens)


@dataclass
class DualityReport:
    """Canonical map of a duality round trip with its verification flags."""

    forward: Dict[Any, Any]
    bijective: bool
    preserves_structure: bool

    @property
    def verified(self) -> bool:
        return self.bijective and self.preserves_structure

    def to_dict(self) -> Dict[str, Any]:
        return {
            "map": [[_label(k), _label(v)] for k, v in self.forward.items()],
            "bijective": self.bijective,
            "preserves_structure": self.preserves_structure,
            "verified": self.verified,
        }


def duality_roundtrip(B: GenBoolAlg) -> DualityReport:
    """Check ``a ↦ [a]`` is an isomorphism ``B → KO(Spec(B))``."""
    X = spec(B)
    K = ko(X)
    filters = ultrafilters(B)
    forward = {a: frozenset(i for i, F in enumerate(filters) if a in F) for a in B.elements}
    bijective = set(forward.values()) == set(K.elements) and len(set(forward.values())) == len(B)
    preserves = all(
        forward[B.meet[a, b]] == forward[a] & forward[b] and forward[B.join[a, b]] == forward[a] | forward[b]
        for a in B.elements
        for b in B.elements
    )
    return DualityReport(forward, bijective, preserves)


def duality_roundtrip_space(X: FiniteSpace) -> DualityReport:
    """Check ``x ↦ {clopens containing x}`` is a homeomorphism ``X → Spec(KO(X))``."""
    K = ko(X)
    S = spec(K)
    filters = ultrafilters(K)
    forward = {}
    for x in X.ordered_points:
        point_filter = frozenset(c for c in K.elements if x in c)
        forward[x] = next((i for i, F in enumerate(filters) if F == point_filter), None)
    bijective = None not in forward.values() and len(set(forward.values())) == len(S.points) == len(X.points)
    preserves = bijective and {frozenset(forward[x] for x in u) for u in X.opens} == set(S.opens)
    return DualityReport(forward, bijective, bool(preserves))


def is_conditionally_complete(B: GenBoolAlg) -> bool:
    """
    Every subset with an upper bound has a least upper bound.

    Always true for finite algebras; checked by enumerating subsets.

    Raises:
        EnumerationCapExceeded: If ``2^|B|`` exceeds ``settings.ENUMERATION_CAP``
    """
    if 1 << len(B) > settings.ENUMERATION_CAP:
        raise EnumerationCapExceeded("Too many subsets to enumerate", {"elements": len(B)})
    for size in range(len(B) + 1):
        for subset in combinations(B.elements, size):
            upper = [u for u in B.elements if all(B.leq(s, u) for s in subset)]
            if upper and not any(all(B.leq(v, w) for w in upper) for v in upper):
                return False
    return True


@dataclass
class RoKoReport:
    equal: bool
    only_regular_open: List[PointSet]
    only_clopen: List[PointSet]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equal": self.equal,
            "only_regular_open": [sorted(s, key=point_key) for s in self.only_regular_open],
            "only_clopen": [sorted(s, key=point_key) for s in self.only_clopen],
        }


def ro_equals_ko(X: FiniteSpace) -> RoKoReport:
    """Compare the regular open sets of ``X`` with its clopen sets."""
    ro = set(ro_algebra(X).carrier)
    clopen = set(X.clopens())
    only_ro = sorted_sets(ro - clopen)
    only_clopen = sorted_sets(clopen - ro)
    return RoKoReport(not only_ro and not only_clopen, only_ro, only_clopen)
