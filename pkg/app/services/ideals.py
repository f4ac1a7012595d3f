"""
Covers, ⊥⊥-ideals and spectra.

This module implements covers and strong covers, the ⊥⊥-ideals of a
family and their correspondence with open sets, the spectrum of maximal
⊥⊥-ideals, and recovery of the point homeomorphism behind a
⊥⊥-isomorphism between two families.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from app.config import settings
from app.services.basicmaps import BlackBoxMap, perp_perp_violation
from app.services.fintop import FiniteSpace, point_key, space_from_basis
from app.services.funcrel import FunctionFamily, covers_syntactic, is_weakly_regular, rel
from app.services.plspace import IntervalSet
from app.utils.errors import (
    EnumerationCapExceeded,
    HypothesisFailed,
    InstanceFormatError,
    NoSuchHomeo,
    NotBijection,
    NotOpen,
    NotPerpPerpIso,
    NotWeaklyRegular,
    TheoremViolation,
)

logger = logging.getLogger(__name__)

MAX_PERMUTATION_POINTS = 8


@dataclass(frozen=True)
class CoverVerdict:
    """Geometric cover criterion together with the quantifier form."""

    geometric: bool
    syntactic: bool

    def __bool__(self) -> bool:
        return self.geometric


def is_cover(A: Iterable[int], b: int, family: FunctionFamily) -> CoverVerdict:
    """
    Decide whether ``A`` covers ``b``.

    The geometric criterion asks that the closure of ``∪[a≠θ]`` contains
    ``supp(b)``; the syntactic one that every ``h`` orthogonal to all of
    ``A`` is orthogonal to ``b``. They agree on weakly regular families.

    Raises:
        NotInFamily: If an index is out of range
    """
    A = list(A)
    family.check(b, *A)
    geo = family.geometry
    closed_union = geo.closure(geo.union(family.neq(a) for a in A))
    geometric = geo.is_subset(family.support(b), closed_union)
    return CoverVerdict(geometric, covers_syntactic(A, b, family))


@dataclass(frozen=True)
class StrongCoverVerdict:
    """Support criterion, plus the witness-search outcome when requested."""

    criterion: bool
    witness_found: Optional[bool] = None
    witness: Tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.criterion


def is_strong_cover(
    B: Iterable[int],
    a: int,
    family: FunctionFamily,
    search_witness: bool = False,
) -> StrongCoverVerdict:
    """
    Decide whether ``B`` strongly covers ``a``: ``supp(a) ⊆ ∪_{b∈B} σ(b)``.

    With ``search_witness`` the family is also searched for a cover of
    ``a`` made of members each ⋐ some element of ``B``.

    Raises:
        NotInFamily: If an index is out of range
    """
    B = list(B)
    family.check(a, *B)
    geo = family.geometry
    criterion = geo.is_subset(family.support(a), geo.union(family.sigma(b) for b in B))
    if not search_witness:
        return StrongCoverVerdict(criterion)
    pool = tuple(c for c in family.indices if any(rel("strongsubset", c, b, family) for b in B))
    found = covers_syntactic(pool, a, family)
    return StrongCoverVerdict(criterion, found, pool if found else ())


def _strongly_covers(members: Iterable[int], a: int, family: FunctionFamily) -> bool:
    geo = family.geometry
    return geo.is_subset(family.support(a), geo.union(family.sigma(b) for b in members))


@dataclass(frozen=True, eq=False)
class PerpIdeal:
    """A ⊥⊥-ideal of a family, stored by member indices."""

    family: FunctionFamily
    members: FrozenSet[int]

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(sorted(self.members))

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, PerpIdeal) and other.family is self.family and other.members == self.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __le__(self, other: "PerpIdeal") -> bool:
        return self.members <= other.members

    def __len__(self) -> int:
        return len(self.members)


def is_perp_ideal(indices: Iterable[int], family: FunctionFamily) -> bool:
    """Check that membership coincides with having a strong cover inside the set."""
    members = frozenset(indices)
    family.check(*members)
    # strong covers are monotone, so the whole (finite) set is the best candidate cover
    return all((a in members) == _strongly_covers(members, a, family) for a in family.indices)


def _check_open(U: Any, family: FunctionFamily):
    if family.is_discrete:
        subset = frozenset(U)
        if subset not in family.space.opens:
            raise NotOpen("Set is not open", {"set": sorted(subset, key=point_key)})
        return subset
    if not isinstance(U, IntervalSet) or not U.is_open_in(family.domain):
        raise NotOpen("Set is not open in the domain", {"set": U.to_list() if isinstance(U, IntervalSet) else str(U)})
    return U


def ideal_of_open(U: Any, family: FunctionFamily) -> PerpIdeal:
    """``I(U) = {f : supp(f) ⊆ U}``."""
    U = _check_open(U, family)
    geo = family.geometry
    return PerpIdeal(family, frozenset(f for f in family.indices if geo.is_subset(family.support(f), U)))


def open_of_ideal(I: PerpIdeal) -> Any:
    """``U(I) = ∪_{f∈I} σ(f)``."""
    family = I.family
    return family.geometry.union(family.sigma(f) for f in I.indices)


def all_ideals(family: FunctionFamily, exhaustive: bool = False) -> List[PerpIdeal]:
    """
    Enumerate the ⊥⊥-ideals of a discrete family.

    Every ideal equals ``I(U(I))``, so candidates are ``I(V)`` for ``V``
    ranging over unions of σ-sets. With ``exhaustive`` every subset of the
    family is tested instead (at most ``settings.MAX_FAMILY_SIZE`` members).

    Returns:
        List[PerpIdeal]: Ideals ordered lexicographically by index tuple

    Raises:
        InstanceFormatError: For PL families
        EnumerationCapExceeded: If exhaustive search exceeds the cap
    """
    if not family.is_discrete:
        raise InstanceFormatError("Ideal enumeration needs the discrete backend")

    found = set()
    if exhaustive:
        if len(family) > settings.MAX_FAMILY_SIZE:
            raise EnumerationCapExceeded("Family too large for exhaustive ideal search", {"size": len(family)})
        for size in range(len(family) + 1):
            for combo in combinations(family.indices, size):
                if is_perp_ideal(combo, family):
                    found.add(frozenset(combo))
    else:
        unions = {frozenset()}
        for s in {family.sigma(f) for f in family.indices}:
            unions |= {u | s for u in unions}
        for V in unions:
            candidate = frozenset(f for f in family.indices if family.support(f) <= V)
            if is_perp_ideal(candidate, family):
                found.add(candidate)

    ideals = [PerpIdeal(family, m) for m in found]
    ideals.sort(key=lambda I: (len(I), I.indices))
    logger.debug(f"Found {len(ideals)} ⊥⊥-ideals in a family of {len(family)}")
    return ideals


def maximal_ideals(family: FunctionFamily) -> List[PerpIdeal]:
    """Proper ideals maximal under inclusion."""
    everything = frozenset(family.indices)
    proper = [I for I in all_ideals(family) if I.members != everything]
    return [I for I in proper if not any(I.members < J.members for J in proper)]


def kappa(x: Hashable, family: FunctionFamily) -> PerpIdeal:
    """
    ``κ(x) = I(X ∖ {x})``.

    Raises:
        HypothesisFailed: If ``X ∖ {x}`` is not open
    """
    if not family.is_discrete:
        raise InstanceFormatError("κ needs the discrete backend")
    complement = family.space.points - {x}
    if complement not in family.space.opens:
        raise HypothesisFailed("T1", "Complement of a point is not open", {"point": x})
    return ideal_of_open(complement, family)


@dataclass
class Spectrum:
    """Maximal ⊥⊥-ideals with the topology generated by the sets ``U(f)``."""

    ideal_points: Tuple[PerpIdeal, ...]
    basic_opens: Dict[int, FrozenSet[int]]
    space: FiniteSpace
    kappa: Dict[Hashable, int] = field(default_factory=dict)
    is_homeomorphism: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [list(I.indices) for I in self.ideal_points],
            "basic_opens": {str(f): sorted(v) for f, v in sorted(self.basic_opens.items())},
            "kappa": {str(x): i for x, i in sorted(self.kappa.items(), key=lambda kv: point_key(kv[0]))},
            "is_homeomorphism": self.is_homeomorphism,
        }


def spectrum(family: FunctionFamily) -> Spectrum:
    """
    Build the spectrum of a weakly regular discrete family and verify κ.

    Spectrum points are the positions of the maximal ideals; ``U(f)`` is
    the set of maximal ideals missing some ``g ⋐ f``.

    Raises:
        NotWeaklyRegular: If the family is not weakly regular
    """
    if not family.is_discrete:
        raise InstanceFormatError("Spectrum needs the discrete backend")
    if not is_weakly_regular(family):
        raise NotWeaklyRegular("Spectrum requires a weakly regular family", {"size": len(family)})

    points = tuple(maximal_ideals(family))
    positions = range(len(points))
    basic = {}
    for f in family.indices:
        below = [g for g in family.indices if rel("strongsubset", g, f, family)]
        basic[f] = frozenset(i for i in positions if any(g not in points[i] for g in below))
    space = space_from_basis(positions, basic.values())
    result = Spectrum(points, basic, space)

    X = family.space
    try:
        kmap = {x: points.index(kappa(x, family)) for x in X.ordered_points}
    except (ValueError, HypothesisFailed):
        logger.warning("κ does not land in the maximal ideals")
        return result
    result.kappa = kmap
    bijective = len(set(kmap.values())) == len(points) == len(kmap)
    opens_match = {frozenset(kmap[x] for x in u) for u in X.opens} == set(space.opens)
    sigma_match = all(frozenset(kmap[x] for x in family.sigma(f)) == basic[f] for f in family.indices)
    result.is_homeomorphism = bijective and opens_match and sigma_match
    if not result.is_homeomorphism:
        logger.warning("κ is not a homeomorphism onto the spectrum")
    return result


def _supports_match(T: BlackBoxMap, phi: Dict[Hashable, Hashable]) -> bool:
    return all(
        frozenset(phi[y] for y in T.target.support(T(f))) == T.source.support(f)
        for f in T.source.indices
    )


def recover_homeo(T: BlackBoxMap) -> Dict[Hashable, Hashable]:
    """
    Recover the homeomorphism ``φ: Y → X`` with ``φ(supp Tf) = supp f``.

    The map is read off the maximal ideals (``T⁻¹κ_Y(y) = κ_X(φ(y))``) and
    checked against an exhaustive search over all point bijections, which
    must find exactly this one.

    Raises:
        NotWeaklyRegular: If either family is not weakly regular
        NotBijection: If T is not bijective
        NotPerpPerpIso: If T or its inverse fails to preserve ⊥⊥
        NoSuchHomeo: If no unique support-matching bijection exists
        TheoremViolation: If the two computations disagree
    """
    source, target = T.source, T.target
    if not (source.is_discrete and target.is_discrete):
        raise InstanceFormatError("Homeomorphism recovery needs discrete families")
    for name, fam in (("source", source), ("target", target)):
        if not is_weakly_regular(fam):
            raise NotWeaklyRegular(f"The {name} family is not weakly regular", {"family": name})
    if not T.is_bijective():
        raise NotBijection("Map is not a bijection", {"mapping": list(T.mapping)})
    violation = perp_perp_violation(T)
    if violation:
        raise NotPerpPerpIso("Map does not preserve ⊥⊥ in both directions", violation)

    X, Y = source.space, target.space
    if len(X.points) != len(Y.points):
        raise NoSuchHomeo("Spaces have different sizes", {"source": len(X.points), "target": len(Y.points)})
    if len(Y.points) > MAX_PERMUTATION_POINTS:
        raise EnumerationCapExceeded("Too many points for bijection search", {"points": len(Y.points)})

    ys, xs = Y.ordered_points, X.ordered_points
    candidates = []
    for image in permutations(xs):
        phi = dict(zip(ys, image))
        if not _supports_match(T, phi):
            continue
        if {frozenset(phi[y] for y in u) for u in Y.opens} != set(X.opens):
            continue
        candidates.append(phi)
    if len(candidates) != 1:
        raise NoSuchHomeo(
            "Expected exactly one support-matching homeomorphism",
            {"candidates": [{str(k): v for k, v in c.items()} for c in candidates[:4]], "count": len(candidates)},
        )
    phi = candidates[0]

    try:
        inverse = T.inverse()
        by_ideals = {}
        for y in ys:
            pulled = frozenset(inverse(g) for g in kappa(y, target).members)
            matches = [x for x in xs if kappa(x, source).members == pulled]
            if len(matches) != 1:
                raise TheoremViolation("Pulled-back maximal ideal is not a point ideal", {"point": y})
            by_ideals[y] = matches[0]
    except HypothesisFailed:
        logger.debug("Spaces are not T1; ideal route skipped")
        return phi
    if by_ideals != phi:
        raise TheoremViolation("Ideal route and bijection search disagree", {"point_map": {str(k): v for k, v in by_ideals.items()}})
    return phi


def perp_iso_check(T: BlackBoxMap) -> List[Dict[str, Any]]:
    """
    For a ⊥-isomorphism, compare σ-inclusions and empty zero sets across T.

    Returns:
        List of violating pairs (empty when the preservation laws hold)

    Raises:
        HypothesisFailed: If T does not preserve ⊥ in both directions
    """
    source, target = T.source, T.target
    for f in source.indices:
        for g in source.indices:
            if rel("perp", f, g, source) != rel("perp", T(f), T(g), target):
                raise HypothesisFailed("perp-iso", "Map does not preserve ⊥", {"f": f, "g": g})
    violations = []
    for f in source.indices:
        if source.geometry.is_empty(source.zero(f)) != target.geometry.is_empty(target.zero(T(f))):
            violations.append({"law": "zero-set", "f": f})
        for g in source.indices:
            if rel("subset", f, g, source) != rel("subset", T(f), T(g), target):
                violations.append({"law": "sigma-inclusion", "f": f, "g": g})
    return violations
