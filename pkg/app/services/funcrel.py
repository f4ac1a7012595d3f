"""
Function families and the disjointness relations.

A family is a finite indexed set of functions with a distinguished base
function θ, living on one of two backends: total maps on a finite space
("discrete") or rational PL functions on a compact domain ("pl"). Both
backends expose their subsets of the underlying space through a geometry
object, so the relations ⊥, ⊥⊥, ⊆ and ⋐ are written once.

Semantic evaluation uses the sets directly. Syntactic evaluation uses the
right-hand sides of the equi-expressibility formulas with every quantifier
ranging over the family itself.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import combinations, product
from typing import Any, Dict, Hashable, Iterable, List, Literal, Optional, Sequence, Tuple

from app.config import settings
from app.services.fintop import FiniteSpace, closure, interior, point_key
from app.services.plspace import (
    Interval,
    IntervalSet,
    PLFunction,
    nonzero_set,
    pl_support,
    zero_function,
)
from app.utils.errors import (
    InstanceFormatError,
    NotInFamily,
    RegularityUndecidablePL,
    TheoremViolation,
)
from app.utils.exact import format_rational

logger = logging.getLogger(__name__)

Relation = Literal["perp", "perpperp", "subset", "strongsubset"]
RELATIONS: Tuple[str, ...] = ("perp", "perpperp", "subset", "strongsubset")

# Equi-expressibility items and the relation each one characterizes.
ITEM_RELATION: Dict[str, str] = {
    "a": "subset",
    "b": "perp",
    "c": "subset",
    "d": "subset",
    "e": "perpperp",
    "f": "strongsubset",
}
DEFAULT_ITEM: Dict[str, str] = {"subset": "a", "perp": "b", "perpperp": "e", "strongsubset": "f"}


class FiniteGeometry:
    """Subsets of a finite space."""

    def __init__(self, space: FiniteSpace):
        self.space = space

    def empty(self):
        return frozenset()

    def full(self):
        return self.space.points

    def union(self, sets: Iterable):
        result = frozenset()
        for s in sets:
            result |= s
        return result

    def intersection(self, a, b):
        return a & b

    def is_subset(self, a, b) -> bool:
        return a <= b

    def is_empty(self, a) -> bool:
        return not a

    def closure(self, a):
        return closure(self.space, a)

    def interior(self, a):
        return interior(self.space, a)

    def contains(self, a, x) -> bool:
        return x in a

    def describe(self, a) -> List:
        return sorted(a, key=point_key)


class IntervalGeometry:
    """Subsets of a compact union of rational intervals."""

    def __init__(self, domain: IntervalSet):
        self.domain = domain

    def empty(self):
        return IntervalSet()

    def full(self):
        return self.domain

    def union(self, sets: Iterable):
        sets = list(sets)
        if not sets:
            return IntervalSet()
        return sets[0].union(*sets[1:])

    def intersection(self, a, b):
        return a.intersection(b)

    def is_subset(self, a, b) -> bool:
        return a.is_subset(b)

    def is_empty(self, a) -> bool:
        return a.is_empty()

    def closure(self, a):
        return a.closure().intersection(self.domain)

    def interior(self, a):
        return a.interior(relative_to=self.domain)

    def contains(self, a, x) -> bool:
        return a.contains(x)

    def describe(self, a) -> List[str]:
        return a.to_list()


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    """
    A finite family of functions containing the base function θ.

    Discrete members are tuples of values aligned with
    ``space.ordered_points``; PL members are ``PLFunction`` objects with
    θ the zero function.
    """

    backend: Literal["discrete", "pl"]
    members: Tuple[Any, ...]
    theta_index: int
    space: Optional[FiniteSpace] = None
    codomain: Tuple[Hashable, ...] = ()
    domain: Optional[IntervalSet] = None
    names: Tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.members)

    @property
    def indices(self) -> range:
        return range(len(self.members))

    @property
    def is_discrete(self) -> bool:
        return self.backend == "discrete"

    @property
    def theta(self) -> Any:
        return self.members[self.theta_index]

    @cached_property
    def points(self) -> Tuple[Hashable, ...]:
        return self.space.ordered_points if self.space is not None else ()

    @cached_property
    def point_position(self) -> Dict[Hashable, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def geometry(self):
        if self.is_discrete:
            return FiniteGeometry(self.space)
        return IntervalGeometry(self.domain)

    def check(self, *indices: int) -> None:
        for i in indices:
            if not isinstance(i, int) or not 0 <= i < len(self.members):
                raise NotInFamily("Index is not a family member", {"index": i, "size": len(self.members)})

    def label(self, i: int) -> str:
        return self.names[i] if self.names else str(i)

    def value(self, i: int, x: Hashable) -> Any:
        """Value of member ``i`` at point ``x``."""
        if self.is_discrete:
            return self.members[i][self.point_position[x]]
        return self.members[i].evaluate(x)

    def index_of(self, member: Any) -> Optional[int]:
        return self._lookup.get(member)

    @cached_property
    def _lookup(self) -> Dict[Any, int]:
        table: Dict[Any, int] = {}
        for i, m in enumerate(self.members):
            table.setdefault(m, i)
        return table

    @cached_property
    def _neq(self) -> List[Any]:
        if self.is_discrete:
            theta = self.theta
            return [
                frozenset(p for p, v, t in zip(self.points, m, theta) if v != t)
                for m in self.members
            ]
        return [nonzero_set(m) for m in self.members]

    @cached_property
    def _support(self) -> List[Any]:
        if self.is_discrete:
            return [closure(self.space, s) for s in self._neq]
        return [pl_support(m) for m in self.members]

    @cached_property
    def _sigma(self) -> List[Any]:
        return [self.geometry.interior(s) for s in self._support]

    def neq(self, i: int):
        """``[f ≠ θ]``."""
        return self._neq[i]

    def support(self, i: int):
        return self._support[i]

    def sigma(self, i: int):
        return self._sigma[i]

    def zero(self, i: int):
        """``Z(f)``: the complement of the support."""
        g = self.geometry
        if self.is_discrete:
            return self.space.points - self._support[i]
        return g.full().difference(self._support[i])


def make_discrete_family(
    space: FiniteSpace,
    codomain: Sequence[Hashable],
    members: Sequence[Any],
    theta_index: int = 0,
    names: Sequence[str] = (),
) -> FunctionFamily:
    """
    Build and validate a discrete-backend family.

    Args:
        space: Underlying finite space
        codomain: The value set H
        members: Each member is a mapping point -> value or a tuple aligned
            with ``space.ordered_points``
        theta_index: Index of θ among the members
        names: Optional member labels

    Raises:
        InstanceFormatError: On non-total functions, values outside H, a bad
            θ index, or a member whose set ``[f≠θ]`` is not open
    """
    points = space.ordered_points
    codomain_set = set(codomain)
    normalized = []
    for i, m in enumerate(members):
        if isinstance(m, dict):
            missing = [p for p in points if p not in m]
            if missing:
                raise InstanceFormatError("Function is not total", {"member": i, "missing": missing})
            values = tuple(m[p] for p in points)
        else:
            values = tuple(m)
            if len(values) != len(points):
                raise InstanceFormatError("Function is not total", {"member": i, "length": len(values)})
        stray = [v for v in values if v not in codomain_set]
        if stray:
            raise InstanceFormatError("Value outside the codomain", {"member": i, "values": [str(v) for v in stray]})
        normalized.append(values)
    if not 0 <= theta_index < len(normalized):
        raise InstanceFormatError("Family must contain θ", {"theta_index": theta_index})
    family = FunctionFamily(
        backend="discrete",
        members=tuple(normalized),
        theta_index=theta_index,
        space=space,
        codomain=tuple(codomain),
        names=tuple(names),
    )
    for i in family.indices:
        if family.neq(i) not in space.opens:
            raise InstanceFormatError(
                "Member differs from θ on a non-open set",
                {"member": i, "set": sorted(family.neq(i), key=point_key)},
            )
    return family


def full_family(space: FiniteSpace, codomain: Sequence[Hashable], theta_value: Optional[Hashable] = None) -> FunctionFamily:
    """All maps ``X → H`` with θ constant; members in lexicographic order."""
    codomain = tuple(codomain)
    if theta_value is None:
        theta_value = codomain[0]
    members = list(product(codomain, repeat=len(space.points)))
    theta = tuple(theta_value for _ in space.points)
    return make_discrete_family(space, codomain, members, members.index(theta))


def make_pl_family(domain: IntervalSet, members: Sequence[PLFunction], names: Sequence[str] = ()) -> FunctionFamily:
    """
    Build a PL family; θ is the zero function and is prepended when absent.

    Raises:
        InstanceFormatError: If a member lives on another domain
    """
    zero = zero_function(domain)
    functions = list(members)
    for i, m in enumerate(functions):
        if m.domain != domain:
            raise InstanceFormatError("Member lives on another domain", {"member": i})
    theta_index = next((i for i, m in enumerate(functions) if all(v == 0 for v in m.values)), None)
    labels = list(names)
    if theta_index is None:
        functions.insert(0, zero)
        theta_index = 0
        if labels:
            labels.insert(0, "theta")
    return FunctionFamily(backend="pl", members=tuple(functions), theta_index=theta_index, domain=domain, names=tuple(labels))


def rel(kind: Relation, f: int, g: int, family: FunctionFamily) -> bool:
    """
    Semantic evaluation of a relation between members ``f`` and ``g``.

    Raises:
        NotInFamily: If an index is out of range
        TheoremViolation: If the two forms of ⊥ disagree
    """
    family.check(f, g)
    geo = family.geometry
    if kind == "perp":
        by_neq = geo.is_empty(geo.intersection(family.neq(f), family.neq(g)))
        by_sigma = geo.is_empty(geo.intersection(family.sigma(f), family.sigma(g)))
        if by_neq != by_sigma:
            raise TheoremViolation("⊥ via [f≠θ] and via σ disagree", {"f": f, "g": g})
        return by_neq
    if kind == "perpperp":
        return geo.is_empty(geo.intersection(family.support(f), family.support(g)))
    if kind == "subset":
        return geo.is_subset(family.sigma(f), family.sigma(g))
    if kind == "strongsubset":
        return geo.is_subset(family.support(f), family.sigma(g))
    raise ValueError(f"Unknown relation: {kind}")


def relation_matrix(kind: Relation, family: FunctionFamily) -> List[List[bool]]:
    return [[rel(kind, f, g, family) for g in family.indices] for f in family.indices]


def covers_syntactic(A: Iterable[int], b: int, family: FunctionFamily) -> bool:
    """Cover in the quantifier form: every ``h`` orthogonal to all of ``A`` is orthogonal to ``b``."""
    A = list(A)
    for h in family.indices:
        if all(rel("perp", h, a, family) for a in A) and not rel("perp", h, b, family):
            return False
    return True


def _exists_bounded_cover(pool: List[int], extra: List[int], target: int, family: FunctionFamily, bound: int) -> bool:
    # covers are monotone in the covering set, so the whole pool decides when the bound allows it
    if bound >= len(pool):
        return covers_syntactic(pool + extra, target, family)
    for size in range(bound + 1):
        for combo in combinations(pool, size):
            if covers_syntactic(list(combo) + extra, target, family):
                return True
    return False


def syntactic_rel(
    kind: Relation,
    f: int,
    g: int,
    family: FunctionFamily,
    item: Optional[str] = None,
    cover_bound: Optional[int] = None,
) -> bool:
    """
    Evaluate a relation through an equi-expressibility formula.

    Item ``a``: f⊆g iff every h⊥g has h⊥f. Item ``b``: f⊥g iff θ is the
    ⊆-infimum of {f,g}. Item ``c``: f⊆g iff every h⋐f has h⋐g. Item ``d``:
    f⊆g iff every h⊥⊥g has h⊥⊥f. Item ``e``: f⊥⊥g iff some h_1..h_n cover f
    with h_i⋐k_i⊥g. Item ``f``: f⋐g iff every b is covered by g together with
    finitely many h_i⊥⊥f.

    Args:
        kind: The relation being characterized
        f, g: Member indices
        family: Quantifier domain
        item: Formula to use; defaults to the canonical item for ``kind``
        cover_bound: Largest witness set for items e and f (default |family|)

    Raises:
        NotInFamily: If an index is out of range
        ValueError: If ``item`` does not characterize ``kind``
    """
    family.check(f, g)
    item = item or DEFAULT_ITEM[kind]
    if ITEM_RELATION.get(item) != kind:
        raise ValueError(f"Item {item} does not characterize {kind}")
    if cover_bound is None:
        cover_bound = settings.COVER_SIZE_BOUND or len(family)
    hs = family.indices

    if item == "a":
        return all(rel("perp", h, f, family) for h in hs if rel("perp", h, g, family))
    if item == "b":
        lower = [h for h in hs if rel("subset", h, f, family) and rel("subset", h, g, family)]
        return all(rel("subset", h, family.theta_index, family) for h in lower)
    if item == "c":
        return all(rel("strongsubset", h, g, family) for h in hs if rel("strongsubset", h, f, family))
    if item == "d":
        return all(rel("perpperp", h, f, family) for h in hs if rel("perpperp", h, g, family))
    if item == "e":
        ks = [k for k in hs if rel("perp", k, g, family)]
        pool = [h for h in hs if any(rel("strongsubset", h, k, family) for k in ks)]
        return _exists_bounded_cover(pool, [], f, family, cover_bound)
    if item == "f":
        pool = [h for h in hs if rel("perpperp", h, f, family)]
        return all(_exists_bounded_cover(pool, [g], b, family, cover_bound) for b in hs)
    raise ValueError(f"Unknown item: {item}")


@dataclass
class EquivalenceReport:
    """Comparison of syntactic and semantic evaluations over all member pairs."""

    backend: str
    items: Tuple[str, ...]
    pairs_checked: int = 0
    discrepancies: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.discrepancies


def check_equi_expressibility(
    family: FunctionFamily,
    items: Iterable[str] = "abcdef",
    cover_bound: Optional[int] = None,
) -> EquivalenceReport:
    """
    Compare each requested formula with the semantic relation on every pair.

    On the discrete backend a discrepancy refutes the equivalence. On the PL
    backend the quantifiers are truncated to a finite family, so a
    discrepancy is classified as not witnessed within the family.
    """
    items = tuple(items)
    report = EquivalenceReport(family.backend, items)
    classification = "refuted" if family.is_discrete else "not_witnessed"
    for f in family.indices:
        for g in family.indices:
            report.pairs_checked += 1
            for item in items:
                kind = ITEM_RELATION[item]
                semantic = rel(kind, f, g, family)
                syntactic = syntactic_rel(kind, f, g, family, item=item, cover_bound=cover_bound)
                if semantic != syntactic:
                    report.discrepancies.append({
                        "item": item, "f": f, "g": g,
                        "semantic": semantic, "syntactic": syntactic,
                        "classification": classification,
                    })
    if report.discrepancies:
        logger.warning(f"{len(report.discrepancies)} equi-expressibility discrepancies on {family.backend} family")
    return report


@dataclass
class RegularityVerdict:
    """Weak-regularity verdict; for PL families it carries the grid used."""

    holds: bool
    failures: List[Dict[str, Any]] = field(default_factory=list)
    grid: Tuple[Fraction, ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def _star(grid: Sequence[Fraction], k: int, domain: IntervalSet) -> IntervalSet:
    lo = grid[k - 1] if k > 0 else grid[k] - 1
    hi = grid[k + 1] if k + 1 < len(grid) else grid[k] + 1
    return IntervalSet.of([Interval(lo, hi, False, False)]).intersection(domain)


def regularity_report(family: FunctionFamily) -> RegularityVerdict:
    """
    Decide weak regularity: every point has σ-sets inside each of its neighbourhoods.

    Discrete backend: checked exactly on minimal neighbourhoods. PL backend:
    the test points are the family's breakpoints and the midpoints between
    them; a breakpoint's neighbourhood is its open star in the breakpoint
    grid, a midpoint's neighbourhood is the union of the stars of the two
    breakpoints around it.
    """
    failures: List[Dict[str, Any]] = []
    if family.is_discrete:
        for x in family.points:
            nbhd = family.space.minimal_neighbourhood(x)
            if not any(x in family.sigma(f) and family.sigma(f) <= nbhd for f in family.indices):
                failures.append({"point": x, "neighbourhood": sorted(nbhd, key=point_key)})
        return RegularityVerdict(not failures, failures)

    domain = family.domain
    grid = sorted({b for m in family.members for b in m.breakpoints} | set(domain.endpoints()))
    tests: List[Tuple[Fraction, IntervalSet]] = []
    for k, g in enumerate(grid):
        tests.append((g, _star(grid, k, domain)))
        if k + 1 < len(grid) and domain.contains((g + grid[k + 1]) / 2):
            tests.append(((g + grid[k + 1]) / 2, _star(grid, k, domain).union(_star(grid, k + 1, domain))))
    for x, nbhd in tests:
        if not any(family.sigma(f).contains(x) and family.sigma(f).is_subset(nbhd) for f in family.indices):
            failures.append({"point": format_rational(x), "neighbourhood": nbhd.to_list()})
    return RegularityVerdict(not failures, failures, tuple(grid))


def is_weakly_regular(family: FunctionFamily, strict: bool = False) -> bool:
    """
    Weak regularity as a boolean.

    Raises:
        RegularityUndecidablePL: With the failing grid points, when ``strict``
            is set and a PL family fails the grid check
    """
    verdict = regularity_report(family)
    if strict and not verdict and not family.is_discrete:
        raise RegularityUndecidablePL("PL family fails the grid regularity check", {"failures": verdict.failures[:10]})
    return verdict.holds


def is_regular(family: FunctionFamily) -> bool:
    """
    Weak regularity plus the value condition: for each point ``x``, open
    ``U ∋ x`` and ``c ∈ H`` some member has ``f(x) = c`` and ``supp f ⊆ U``.

    Raises:
        InstanceFormatError: For PL families
    """
    if not family.is_discrete:
        raise InstanceFormatError("Regularity is decided on the discrete backend only")
    if not is_weakly_regular(family):
        return False
    for x in family.points:
        nbhd = family.space.minimal_neighbourhood(x)
        for c in family.codomain:
            if not any(family.value(f, x) == c and family.support(f) <= nbhd for f in family.indices):
                return False
    return True


def compatibility_order(f: int, g: int, family: FunctionFamily) -> bool:
    """``f ⪯ g``: ``g`` agrees with ``f`` on the support of ``f``."""
    family.check(f, g)
    supp = family.support(f)
    if family.is_discrete:
        return all(family.value(f, x) == family.value(g, x) for x in supp)
    fm, gm = family.members[f], family.members[g]
    points = {b for b in fm.breakpoints + gm.breakpoints if supp.contains(b)} | set(supp.endpoints())
    return all(fm.evaluate(p) == gm.evaluate(p) for p in points)


def perp_via_preceq(f: int, g: int, family: FunctionFamily) -> bool:
    """
    ⊥ expressed through ⪯: the ⪯-infimum of {f,g} is θ and {f,g} has a
    ⪯-upper bound, with both searched in the family.
    """
    family.check(f, g)
    lower = [h for h in family.indices if compatibility_order(h, f, family) and compatibility_order(h, g, family)]
    infimum_is_theta = all(compatibility_order(h, family.theta_index, family) for h in lower)
    has_upper = any(compatibility_order(f, u, family) and compatibility_order(g, u, family) for u in family.indices)
    return infimum_is_theta and has_upper
