"""
Basic maps between function families.

A map ``T`` between families is φ-basic when ``Tf(y)`` depends only on
``f(φ(y))``; it is then given by a transform χ with
``(Tf)(y) = χ(y, f(φ(y)))``. This module builds such maps, tests
basicness against a candidate φ, extracts the transform, searches for
the unique φ, relates signature morphisms to their sections and handles
non-vanishing bijections.

Maps are stored extensionally as index mappings between two families.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

from app.config import settings
from app.services.fintop import FiniteSpace, point_key
from app.services.funcrel import FunctionFamily, is_weakly_regular, make_discrete_family, rel
from app.utils.errors import (
    EnumerationCapExceeded,
    FamilyNotSubmodel,
    InstanceFormatError,
    MultipleBasicPhi,
    NoSuchHomeo,
    NotBasic,
    NotBijection,
    NotGroupFamily,
    NotNonvanishing,
    PointOutOfSpace,
    SectionDomainGap,
    TheoremViolation,
)

logger = logging.getLogger(__name__)

PointMap = Dict[Hashable, Hashable]
Sections = Dict[Hashable, Dict[Hashable, Hashable]]


@dataclass(frozen=True, eq=False)
class BlackBoxMap:
    """An index mapping from source members to target members."""

    source: FunctionFamily
    target: FunctionFamily
    mapping: Tuple[int, ...]
    declared: Tuple[str, ...] = ()

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def is_bijective(self) -> bool:
        return len(self.source) == len(self.target) and sorted(self.mapping) == list(self.target.indices)

    def inverse(self) -> "BlackBoxMap":
        """
        Raises:
            NotBijection: If the mapping is not a bijection
        """
        if not self.is_bijective():
            raise NotBijection("Map is not a bijection", {"mapping": list(self.mapping)})
        back = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            back[j] = i
        return BlackBoxMap(self.target, self.source, tuple(back), self.declared)

    def image(self, i: int, y: Hashable) -> Hashable:
        """``Tf(y)`` for source member ``i``."""
        return self.target.value(self.mapping[i], y)


def make_map(
    source: FunctionFamily,
    target: FunctionFamily,
    mapping: Union[Sequence[int], Mapping[int, int]],
    declared: Sequence[str] = (),
) -> BlackBoxMap:
    """
    Validate an index mapping.

    Raises:
        InstanceFormatError: If the mapping is not total on the source
        NotInFamily: If an image index is out of range
    """
    if isinstance(mapping, Mapping):
        keys = {int(k): int(v) for k, v in mapping.items()}
        missing = [i for i in source.indices if i not in keys]
        if missing:
            raise InstanceFormatError("Mapping is not total", {"missing": missing})
        mapping = [keys[i] for i in source.indices]
    mapping = tuple(int(j) for j in mapping)
    if len(mapping) != len(source):
        raise InstanceFormatError("Mapping is not total", {"length": len(mapping), "size": len(source)})
    target.check(*mapping)
    return BlackBoxMap(source, target, mapping, tuple(declared))


def identity_map(family: FunctionFamily) -> BlackBoxMap:
    return BlackBoxMap(family, family, tuple(family.indices))


@dataclass
class Transform:
    """Point map ``φ: Y → X`` with one section per target point."""

    phi: PointMap
    sections: Sections = field(default_factory=dict)

    def __call__(self, y: Hashable, t: Hashable) -> Hashable:
        return self.sections[y][t]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phi": {str(y): x for y, x in self.phi.items()},
            "sections": {
                str(y): [[t, v] for t, v in sorted(sec.items(), key=lambda kv: point_key(kv[0]))]
                for y, sec in self.sections.items()
            },
        }


def _check_phi(phi: Mapping, source: FunctionFamily, target_points: Sequence[Hashable]) -> PointMap:
    phi = dict(phi)
    missing = [y for y in target_points if y not in phi]
    if missing:
        raise PointOutOfSpace("φ is not defined on every target point", {"missing": missing})
    stray = [x for x in phi.values() if x not in source.space.points]
    if stray:
        raise PointOutOfSpace("φ leaves the source space", {"points": stray})
    return {y: phi[y] for y in target_points}


def fiber(source: FunctionFamily, x: Hashable) -> List[Hashable]:
    """Realized values ``{f(x) : f ∈ source}`` in first-occurrence order."""
    seen: Dict[Hashable, None] = {}
    for f in source.indices:
        seen.setdefault(source.value(f, x), None)
    return list(seen)


def build_basic(
    phi: Mapping,
    sections: Optional[Mapping[Hashable, Mapping]],
    source: FunctionFamily,
    target: Union[FunctionFamily, FiniteSpace],
    codomain: Sequence[Hashable] = (),
) -> BlackBoxMap:
    """
    Build ``T_{(φ,χ)}`` by ``(Tf)(y) = χ(y, f(φ(y)))``.

    Args:
        phi: Point map from target points to source points
        sections: Per target point, a map on realized fiber values;
            None means identity sections
        source: Discrete source family
        target: Either a family the images must belong to, or a space on
            which the image family is assembled (θ_Y = Tθ_X)
        codomain: Codomain of an assembled image family (default: the
            section values)

    Raises:
        SectionDomainGap: If a section misses a realized fiber value
        InstanceFormatError: If an image is not a member of the given target
    """
    space = target.space if isinstance(target, FunctionFamily) else target
    ys = space.ordered_points
    phi = _check_phi(phi, source, ys)

    chi: Sections = {}
    for y in ys:
        realized = fiber(source, phi[y])
        given = None if sections is None else sections.get(y)
        if given is None and sections is not None:
            raise SectionDomainGap("No section for target point", {"point": y})
        gaps = [t for t in realized if given is not None and t not in given]
        if gaps:
            raise SectionDomainGap("Section misses realized values", {"point": y, "values": [str(t) for t in gaps]})
        chi[y] = {t: (t if given is None else given[t]) for t in realized}

    images = [tuple(chi[y][source.value(f, phi[y])] for y in ys) for f in source.indices]

    if isinstance(target, FunctionFamily):
        mapping = []
        for f, img in enumerate(images):
            j = target.index_of(img)
            if j is None:
                raise InstanceFormatError("Image is not a target member", {"member": f, "image": [str(v) for v in img]})
            mapping.append(j)
        return BlackBoxMap(source, target, tuple(mapping))

    distinct: Dict[Tuple, int] = {}
    for img in images:
        distinct.setdefault(img, len(distinct))
    if not codomain:
        codomain = sorted({v for sec in chi.values() for v in sec.values()}, key=point_key)
    family = make_discrete_family(
        space, codomain, list(distinct), theta_index=distinct[images[source.theta_index]]
    )
    return BlackBoxMap(source, family, tuple(distinct[img] for img in images))


def basic_counterexample(T: BlackBoxMap, phi: Mapping) -> Optional[Dict[str, Any]]:
    """First ``(f, g, y)`` with ``f(φ(y)) = g(φ(y))`` but ``Tf(y) ≠ Tg(y)``, or None."""
    source = T.source
    phi = _check_phi(phi, source, T.target.space.ordered_points)
    for y, x in phi.items():
        seen: Dict[Hashable, int] = {}
        for f in source.indices:
            t = source.value(f, x)
            g = seen.setdefault(t, f)
            if T.image(f, y) != T.image(g, y):
                return {"f": g, "g": f, "y": y}
    return None


def is_phi_basic(T: BlackBoxMap, phi: Mapping) -> bool:
    return basic_counterexample(T, phi) is None


def extract_transform(T: BlackBoxMap, phi: Mapping) -> Transform:
    """
    Read the transform off a φ-basic map: ``χ(y, t) = Tf(y)`` for any ``f(φ(y)) = t``.

    Raises:
        NotBasic: With the counterexample ``(f, g, y)``
    """
    witness = basic_counterexample(T, phi)
    if witness is not None:
        raise NotBasic("Map is not basic for the given point map", witness)
    source = T.source
    phi = _check_phi(phi, source, T.target.space.ordered_points)
    sections: Sections = {}
    for y, x in phi.items():
        section: Dict[Hashable, Hashable] = {}
        for f in source.indices:
            section.setdefault(source.value(f, x), T.image(f, y))
        sections[y] = section
    return Transform(phi, sections)


def section_flags(T: BlackBoxMap, phi: Mapping) -> Dict[Hashable, Dict[str, bool]]:
    """
    Injectivity of each section and surjectivity onto the target fiber.

    A section is injective exactly when ``Tf(y) = Tg(y)`` forces
    ``f(φ(y)) = g(φ(y))``.
    """
    chi = extract_transform(T, phi)
    flags = {}
    for y, section in chi.sections.items():
        values = list(section.values())
        flags[y] = {
            "injective": len(set(values)) == len(values),
            "surjective": set(values) == set(fiber(T.target, y)),
        }
    return flags


def perp_perp_violation(T: BlackBoxMap) -> Optional[Dict[str, Any]]:
    """First pair on which ``f⊥⊥g ⟺ Tf⊥⊥Tg`` fails, or None."""
    for f in T.source.indices:
        for g in T.source.indices:
            if rel("perpperp", f, g, T.source) != rel("perpperp", T(f), T(g), T.target):
                return {"f": f, "g": g, "Tf": T(f), "Tg": T(g)}
    return None


def perp_perp_preserved(T: BlackBoxMap) -> bool:
    """Whether a bijective T and its inverse both preserve ⊥⊥."""
    return T.is_bijective() and perp_perp_violation(T) is None


def _all_point_maps(source: FunctionFamily, target: FunctionFamily):
    xs, ys = source.space.ordered_points, target.space.ordered_points
    if len(xs) ** len(ys) > settings.ENUMERATION_CAP:
        raise EnumerationCapExceeded("Too many candidate point maps", {"candidates": len(xs) ** len(ys)})
    for image in product(xs, repeat=len(ys)):
        yield dict(zip(ys, image))


def basic_point_maps(T: BlackBoxMap) -> List[PointMap]:
    """Every ``φ: Y → X`` for which T is φ-basic."""
    return [phi for phi in _all_point_maps(T.source, T.target) if is_phi_basic(T, phi)]


def unique_basic_phi(T: BlackBoxMap) -> Optional[PointMap]:
    """
    Search all point maps for the one making T basic.

    When T is a ⊥⊥-isomorphism whose inverse is basic as well, the result
    is compared with the homeomorphism read off the ⊥⊥-ideals.

    Returns:
        The unique φ, or None when no point map works

    Raises:
        MultipleBasicPhi: If several point maps work
        TheoremViolation: If the two computations of φ disagree
    """
    from app.services.ideals import recover_homeo

    found = basic_point_maps(T)
    if not found:
        return None
    if len(found) > 1:
        logger.warning(f"{len(found)} point maps make the map basic")
        raise MultipleBasicPhi(
            "More than one point map makes the map basic",
            {"candidates": [{str(y): x for y, x in phi.items()} for phi in found[:4]], "count": len(found)},
        )
    phi = found[0]

    if (
        perp_perp_preserved(T)
        and basic_point_maps(T.inverse())
        and is_weakly_regular(T.source)
        and is_weakly_regular(T.target)
    ):
        homeo = recover_homeo(T)
        if homeo != phi:
            raise TheoremViolation(
                "Basic point map differs from the recovered homeomorphism",
                {"basic": {str(k): v for k, v in phi.items()}, "homeo": {str(k): v for k, v in homeo.items()}},
            )
    return phi


@dataclass
class Signature:
    """
    Operation symbols with tables on the source and target codomains.

    Tables map argument tuples to values; nullary symbols use the key ``()``.
    """

    symbols: Tuple[Tuple[str, int], ...]
    source_tables: Dict[str, Dict[Tuple, Hashable]]
    target_tables: Dict[str, Dict[Tuple, Hashable]]

    def __post_init__(self):
        for name, arity in self.symbols:
            for side in (self.source_tables, self.target_tables):
                table = side.get(name)
                if table is None:
                    raise InstanceFormatError("Symbol has no interpretation", {"symbol": name})
                if any(len(args) != arity for args in table):
                    raise InstanceFormatError("Table does not match the arity", {"symbol": name, "arity": arity})


def _lift(family: FunctionFamily, table: Dict[Tuple, Hashable], args: Tuple[int, ...], name: str) -> int:
    values = []
    for x in family.points:
        key = tuple(family.value(a, x) for a in args)
        if key not in table:
            raise FamilyNotSubmodel("Operation undefined on family values", {"symbol": name, "args": [str(v) for v in key]})
        values.append(table[key])
    j = family.index_of(tuple(values))
    if j is None:
        raise FamilyNotSubmodel("Family is not closed under the operation", {"symbol": name, "args": list(args)})
    return j


@dataclass
class SignatureReport:
    map_preserves: bool
    sections_preserve: bool
    witness: Dict[str, Any] = field(default_factory=dict)


def check_signature_correspondence(T: BlackBoxMap, phi: Mapping, sig: Signature) -> SignatureReport:
    """
    Compare "T is a morphism" with "every section is a morphism on its fiber".

    Raises:
        NotBasic: If T is not φ-basic
        FamilyNotSubmodel: If either family is not closed under an operation
        TheoremViolation: If the two sides disagree
    """
    chi = extract_transform(T, phi)
    source, target = T.source, T.target
    report = SignatureReport(True, True)

    for name, arity in sig.symbols:
        s_table, t_table = sig.source_tables[name], sig.target_tables[name]
        # closure of both families is checked before any comparison
        lifted_t = {args: _lift(target, t_table, args, name) for args in product(target.indices, repeat=arity)}
        for args in product(source.indices, repeat=arity):
            img = T(_lift(source, s_table, args, name))
            if report.map_preserves and img != lifted_t[tuple(T(a) for a in args)]:
                report.map_preserves = False
                report.witness.setdefault("map", {"symbol": name, "args": list(args)})

        for y, x in chi.phi.items():
            section = chi.sections[y]
            for ts in product(section, repeat=arity):
                lhs = section.get(s_table[ts])
                rhs = t_table.get(tuple(section[t] for t in ts))
                if lhs != rhs:
                    report.sections_preserve = False
                    report.witness.setdefault("section", {"symbol": name, "point": y, "values": [str(t) for t in ts]})
                    break

    if report.map_preserves != report.sections_preserve:
        raise TheoremViolation("Morphism and section criteria disagree", report.witness)
    return report


@dataclass
class GroupTables:
    """Multiplication tables and identities of the two codomain groups."""

    source_mul: Dict[Tuple[Hashable, Hashable], Hashable]
    source_identity: Hashable
    target_mul: Dict[Tuple[Hashable, Hashable], Hashable]
    target_identity: Hashable


def _check_subgroup(family: FunctionFamily, mul: Dict, identity: Hashable, label: str) -> Dict[Tuple[int, int], int]:
    one = tuple(identity for _ in family.points)
    if family.index_of(one) is None:
        raise NotGroupFamily("Family lacks the identity function", {"family": label})
    products = {}
    for f, g in product(family.indices, repeat=2):
        try:
            products[(f, g)] = _lift(family, mul, (f, g), "mul")
        except FamilyNotSubmodel as e:
            raise NotGroupFamily("Family is not a subgroup under pointwise product", {"family": label, **e.witness})
    return products


def group_basic_criterion(T: BlackBoxMap, phi: Mapping, groups: GroupTables) -> bool:
    """
    Kernel criterion: ``f(φ(y)) = 1`` implies ``Tf(y) = 1``.

    Raises:
        NotGroupFamily: If a family is not a subgroup or T is not a group isomorphism
        TheoremViolation: If the criterion and basicness disagree
    """
    src = _check_subgroup(T.source, groups.source_mul, groups.source_identity, "source")
    tgt = _check_subgroup(T.target, groups.target_mul, groups.target_identity, "target")
    if not T.is_bijective():
        raise NotGroupFamily("Map is not a bijection", {"mapping": list(T.mapping)})
    for (f, g), fg in src.items():
        if T(fg) != tgt[(T(f), T(g))]:
            raise NotGroupFamily("Map is not a group homomorphism", {"f": f, "g": g})

    phi = _check_phi(phi, T.source, T.target.space.ordered_points)
    criterion = all(
        T.image(f, y) == groups.target_identity
        for y, x in phi.items()
        for f in T.source.indices
        if T.source.value(f, x) == groups.source_identity
    )
    if criterion != is_phi_basic(T, phi):
        raise TheoremViolation("Kernel criterion and basicness disagree", {"criterion": criterion})
    return criterion


def _zero_masks(family: FunctionFamily) -> List[int]:
    masks = []
    for f in family.indices:
        neq = family.neq(f)
        masks.append(sum(1 << k for k, p in enumerate(family.points) if p not in neq))
    return masks


def nonvanishing_counterexample(T: BlackBoxMap) -> Optional[List[int]]:
    """
    Smallest-mask subset S with ``⋂_{f∈S}[f=θ] = ∅`` not matching ``⋂[Tf=θ] = ∅``.

    Raises:
        EnumerationCapExceeded: If the family exceeds ``settings.MAX_FAMILY_SIZE``
    """
    n = len(T.source)
    if n > settings.MAX_FAMILY_SIZE:
        raise EnumerationCapExceeded("Family too large for the non-vanishing check", {"size": n})
    zs, zt = _zero_masks(T.source), _zero_masks(T.target)
    full_s, full_t = (1 << len(T.source.points)) - 1, (1 << len(T.target.points)) - 1
    inter_s, inter_t = [full_s] * (1 << n), [full_t] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        inter_s[mask] = inter_s[rest] & zs[low]
        inter_t[mask] = inter_t[rest] & zt[T(low)]
        if (inter_s[mask] == 0) != (inter_t[mask] == 0):
            return [i for i in range(n) if mask >> i & 1]
    return None


def is_nonvanishing(T: BlackBoxMap) -> bool:
    return nonvanishing_counterexample(T) is None


def nonvanishing_to_homeo(T: BlackBoxMap) -> PointMap:
    """
    The unique φ with ``[f=θ_X] = φ([Tf=θ_Y])`` for a non-vanishing bijection.

    Raises:
        NotBijection: If T is not bijective
        NotNonvanishing: With the failing subset
        TheoremViolation: If T is non-vanishing but not a ⊥⊥-isomorphism
        NoSuchHomeo: If no such point bijection exists
    """
    if not T.is_bijective():
        raise NotBijection("Map is not a bijection", {"mapping": list(T.mapping)})
    witness = nonvanishing_counterexample(T)
    if witness is not None:
        raise NotNonvanishing("Map is not non-vanishing", {"subset": witness})
    violation = perp_perp_violation(T)
    if violation is not None:
        raise TheoremViolation("Non-vanishing bijection does not preserve ⊥⊥", violation)

    source, target = T.source, T.target
    phi: PointMap = {}
    for y in target.points:
        vanish_y = tuple(y not in target.neq(T(f)) for f in source.indices)
        matches = [x for x in source.points if tuple(x not in source.neq(f) for f in source.indices) == vanish_y]
        if len(matches) != 1:
            raise NoSuchHomeo("Zero sets do not single out a point", {"point": y, "candidates": matches})
        phi[y] = matches[0]
    if len(set(phi.values())) != len(source.points) or len(phi) != len(source.points):
        raise NoSuchHomeo("Recovered point map is not a bijection", {"phi": {str(k): v for k, v in phi.items()}})
    return phi
