"""
Decomposition of structure-preserving maps on finite function families.

Covers lattice isomorphisms of integer-valued families (Kaplansky),
additive lattice isomorphisms, and linear maps over the Gaussian
rationals that preserve non-vanishing functions, disjointness, the sup
norm or an L¹ norm. Every decomposition is returned only after the
weighted-composition formula ``Tf(y) = p(y) f(φ(y))`` has been checked on
every member.

All spaces here are finite and discrete, so interiors of equality sets are
the sets themselves and every closed set is compact.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Dict, Hashable, List, Literal, Mapping, Optional, Sequence, Tuple

from app.services.basicmaps import BlackBoxMap, perp_perp_violation
from app.services.fintop import FiniteSpace, is_discrete, point_key
from app.services.funcrel import FunctionFamily, make_discrete_family, rel
from app.utils.errors import (
    DensityNotPositive,
    FormulaMismatch,
    HypothesisFailed,
    InstanceFormatError,
    MissingIndicators,
    NoConsistentPhi,
    NotBijection,
    NotLatticeIso,
    TheoremViolation,
)
from app.utils.exact import UNIT_PHASES, GaussianRational, to_json_number

logger = logging.getLogger(__name__)

PointMap = Dict[Hashable, Hashable]
Mode = Literal["liwong", "jarosz", "banachstone", "l1"]
MODES: Tuple[str, ...] = ("liwong", "jarosz", "banachstone", "l1")


# Chain-valued families

def make_chain_family(space: FiniteSpace, members: Sequence[Any], names: Sequence[str] = ()) -> FunctionFamily:
    """
    Build an integer-valued sublattice of functions on a discrete space.

    θ is the pointwise minimum of the family.

    Raises:
        InstanceFormatError: If the space is not discrete, a value is not an
            integer, or the family is not closed under min and max
    """
    if not is_discrete(space):
        raise InstanceFormatError("Chain families live on discrete spaces")
    points = space.ordered_points
    rows = []
    for i, m in enumerate(members):
        row = tuple(m[p] for p in points) if isinstance(m, Mapping) else tuple(m)
        if len(row) != len(points) or any(isinstance(v, bool) or not isinstance(v, int) for v in row):
            raise InstanceFormatError("Chain member must be a total integer function", {"member": i})
        rows.append(row)
    present = set(rows)
    for f, g in product(rows, repeat=2):
        for op in (min, max):
            if tuple(op(a, b) for a, b in zip(f, g)) not in present:
                raise InstanceFormatError(
                    "Family is not closed under pointwise min and max",
                    {"f": list(f), "g": list(g), "operation": op.__name__},
                )
    bottom = tuple(min(col) for col in zip(*rows))
    codomain = sorted({v for row in rows for v in row})
    return make_discrete_family(space, codomain, rows, rows.index(bottom), names)


def satisfies_l2(family: FunctionFamily) -> bool:
    """``cl[f≠g]`` is compact for all members; automatic on a finite space."""
    return family.is_discrete


def _pointwise(family: FunctionFamily, f: int, g: int, op) -> Optional[int]:
    return family.index_of(tuple(op(a, b) for a, b in zip(family.members[f], family.members[g])))


def _check_lattice_iso(T: BlackBoxMap, require_closed: bool = False) -> None:
    if not T.is_bijective():
        raise NotBijection("Map is not a bijection", {"mapping": list(T.mapping)})
    source, target = T.source, T.target
    for f, g in product(source.indices, repeat=2):
        for op in (min, max):
            h = _pointwise(source, f, g, op)
            if h is None:
                if require_closed:
                    raise InstanceFormatError("Family is not a sublattice", {"f": f, "g": g, "operation": op.__name__})
                continue
            if _pointwise(target, T(f), T(g), op) != T(h):
                raise NotLatticeIso("Map does not preserve the lattice operation", {"f": f, "g": g, "operation": op.__name__})


def _upper_family(family: FunctionFamily, f0: int) -> Tuple[FunctionFamily, List[int]]:
    base = family.members[f0]
    kept = [h for h in family.indices if all(a >= b for a, b in zip(family.members[h], base))]
    sub = make_discrete_family(
        family.space, family.codomain, [family.members[h] for h in kept], kept.index(f0)
    )
    return sub, kept


@dataclass
class KaplanskyReport:
    """Restriction of a lattice isomorphism to the functions above ``f0``."""

    f0: int
    g0: int
    restricted: BlackBoxMap
    source_members: List[int]
    target_members: List[int]
    perp_mismatches: List[Tuple[int, int]] = field(default_factory=list)
    strong_mismatches: List[Tuple[int, int]] = field(default_factory=list)
    perp_perp_iso: bool = False

    @property
    def verified(self) -> bool:
        return self.perp_perp_iso and not self.perp_mismatches and not self.strong_mismatches

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f0": self.f0,
            "g0": self.g0,
            "source_members": self.source_members,
            "target_members": self.target_members,
            "restricted_mapping": list(self.restricted.mapping),
            "perp_perp_iso": self.perp_perp_iso,
            "verified": self.verified,
        }


def _condition_k(f: int, g: int, sub: FunctionFamily) -> bool:
    # some k ⊆ g bounds every h ⊆ f
    below_f = [h for h in sub.indices if rel("subset", h, f, sub)]
    for k in sub.indices:
        if not rel("subset", k, g, sub):
            continue
        if all(all(a >= b for a, b in zip(sub.members[k], sub.members[h])) for h in below_f):
            return True
    return False


def kaplansky_restrict(T: BlackBoxMap, f0: int) -> KaplanskyReport:
    """
    Restrict a lattice isomorphism to ``A_{≥f0} → A_{≥Tf0}``.

    Checks that ⊥ above ``f0`` is ``f∧g = f0``, that ⋐ is the bounded-cover
    condition, and that the restriction is a ⊥⊥-isomorphism.

    Raises:
        NotLatticeIso: If T does not preserve min and max
        TheoremViolation: If one of the characterizations fails
    """
    _check_lattice_iso(T, require_closed=True)
    T.source.check(f0)
    g0 = T(f0)
    src, kept_s = _upper_family(T.source, f0)
    tgt, kept_t = _upper_family(T.target, g0)
    position_t = {j: k for k, j in enumerate(kept_t)}
    mapping = []
    for h in kept_s:
        if T(h) not in position_t:
            raise NotLatticeIso("Map does not send A≥f0 into A≥Tf0", {"member": h})
        mapping.append(position_t[T(h)])
    restricted = BlackBoxMap(src, tgt, tuple(mapping))
    report = KaplanskyReport(f0, g0, restricted, kept_s, kept_t)

    for f, g in product(src.indices, repeat=2):
        meet_is_base = _pointwise(src, f, g, min) == src.theta_index
        if rel("perp", f, g, src) != meet_is_base:
            report.perp_mismatches.append((kept_s[f], kept_s[g]))
        if rel("strongsubset", f, g, src) != _condition_k(f, g, src):
            report.strong_mismatches.append((kept_s[f], kept_s[g]))
    report.perp_perp_iso = restricted.is_bijective() and perp_perp_violation(restricted) is None

    if not report.verified:
        raise TheoremViolation(
            "Restriction above f0 does not behave as a ⊥⊥-isomorphism",
            {"perp": report.perp_mismatches[:4], "strong": report.strong_mismatches[:4], "perp_perp_iso": report.perp_perp_iso},
        )
    return report


def _partition(family: FunctionFamily, members: Sequence[int], value) -> frozenset:
    groups: Dict[Any, List[int]] = {}
    for k, f in enumerate(members):
        groups.setdefault(value(f), []).append(k)
    return frozenset(frozenset(g) for g in groups.values())


def _phi_from_partitions(T: BlackBoxMap, members: Sequence[int]) -> Dict[Hashable, List[Hashable]]:
    source, target = T.source, T.target
    by_x = {x: _partition(source, members, lambda f, x=x: source.value(f, x)) for x in source.points}
    return {
        y: [x for x, part in by_x.items() if part == _partition(target, members, lambda f, y=y: T.image(f, y))]
        for y in target.points
    }


def kaplansky_recover_phi(T: BlackBoxMap) -> PointMap:
    """
    Recover the bijection φ with ``[Tf=Tg] = φ⁻¹([f=g])`` for all members.

    Each point is matched by the partition of the family into classes of
    equal values there. The same φ must be consistent with the restriction
    to ``A_{≥f0}`` for every ``f0``.

    Raises:
        NotLatticeIso: If T does not preserve min and max
        NoConsistentPhi: If no unique consistent bijection exists
    """
    _check_lattice_iso(T)
    candidates = _phi_from_partitions(T, list(T.source.indices))
    phi = {}
    for y, xs in candidates.items():
        if len(xs) != 1:
            raise NoConsistentPhi("Equality sets do not single out a point", {"point": y, "candidates": xs})
        phi[y] = xs[0]
    if len(set(phi.values())) != len(T.source.points):
        raise NoConsistentPhi("Recovered point map is not a bijection", {"phi": {str(k): v for k, v in phi.items()}})

    for f0 in T.source.indices:
        base = T.source.members[f0]
        upper = [h for h in T.source.indices if all(a >= b for a, b in zip(T.source.members[h], base))]
        local = _phi_from_partitions(T, upper)
        for y, xs in local.items():
            if phi[y] not in xs:
                raise NoConsistentPhi("Point map depends on the base function", {"f0": f0, "point": y})
    return phi


# Weighted compositions

@dataclass
class WeightedDecomposition:
    """``Tf(y) = p(y) f(φ(y))`` with the per-mode extras."""

    phi: PointMap
    p: Dict[Hashable, Any]
    mode: str
    ratio: Dict[Hashable, Fraction] = field(default_factory=dict)
    unit: Dict[Hashable, GaussianRational] = field(default_factory=dict)
    blocks: Dict[int, Dict[Hashable, Any]] = field(default_factory=dict)
    exponent: Optional[Any] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "mode": self.mode,
            "phi": {str(y): x for y, x in self.phi.items()},
            "p": {str(y): to_json_number(v) for y, v in self.p.items()},
            "verified": True,
        }
        if self.ratio:
            data["ratio"] = {str(y): to_json_number(v) for y, v in self.ratio.items()}
            data["unit"] = {str(y): to_json_number(v) for y, v in self.unit.items()}
        if self.blocks:
            data["blocks"] = len(self.blocks)
        return data


def _indicator_index(family: FunctionFamily, x: Hashable) -> int:
    row = tuple(1 if p == x else 0 for p in family.points)
    j = family.index_of(row)
    if j is None:
        raise MissingIndicators("Family lacks the indicator of a point", {"point": x})
    return j


def _check_formula(T: BlackBoxMap, phi: PointMap, p: Mapping[Hashable, Any]) -> None:
    for f in T.source.indices:
        for y, x in phi.items():
            if T.image(f, y) != p[y] * T.source.value(f, x):
                raise FormulaMismatch(
                    "Map is not the weighted composition",
                    {"f": f, "y": y, "expected": to_json_number(p[y] * T.source.value(f, x)), "got": to_json_number(T.image(f, y))},
                )


def _sum_index(family: FunctionFamily, f: int, g: int) -> Optional[int]:
    return family.index_of(tuple(a + b for a, b in zip(family.members[f], family.members[g])))


def _check_additive(T: BlackBoxMap) -> None:
    for f, g in product(T.source.indices, repeat=2):
        h = _sum_index(T.source, f, g)
        if h is not None and _sum_index(T.target, T(f), T(g)) != T(h):
            raise HypothesisFailed("additive", "Map is not additive", {"f": f, "g": g})


def additive_decompose(T: BlackBoxMap) -> WeightedDecomposition:
    """
    Decompose an additive lattice isomorphism of rational-valued families.

    Raises:
        HypothesisFailed: If T is not additive
        NotLatticeIso: If T does not preserve min and max where defined
        MissingIndicators: If an indicator function is absent
        FormulaMismatch: If the formula fails or a weight is not positive
    """
    _check_additive(T)
    phi = kaplansky_recover_phi(T)
    p = {y: T.image(_indicator_index(T.source, x), y) for y, x in phi.items()}
    for y, v in p.items():
        if not v > 0:
            raise FormulaMismatch("Weight is not positive", {"y": y, "p": to_json_number(v)})
    _check_formula(T, phi, p)
    return WeightedDecomposition(phi, p, "additive")


def _gaussian_rows(family: FunctionFamily) -> Dict[Tuple, int]:
    table: Dict[Tuple, int] = {}
    for i, m in enumerate(family.members):
        table.setdefault(tuple(GaussianRational.coerce(v) for v in m), i)
    return table


PROBE_SCALARS = (GaussianRational(-1), GaussianRational(0, 1), GaussianRational(0, -1), GaussianRational(2))


def check_linear(T: BlackBoxMap) -> None:
    """
    Check additivity and homogeneity on combinations that stay in the family.

    Raises:
        HypothesisFailed: With the failing combination
    """
    src, tgt = _gaussian_rows(T.source), _gaussian_rows(T.target)
    rows_s = {i: row for row, i in src.items()}
    rows_t = {i: row for row, i in tgt.items()}
    for f, g in product(rows_s, repeat=2):
        h = src.get(tuple(a + b for a, b in zip(rows_s[f], rows_s[g])))
        if h is not None and tgt.get(tuple(a + b for a, b in zip(rows_t[T(f)], rows_t[T(g)]))) != T(h):
            raise HypothesisFailed("linear", "Map is not additive", {"f": f, "g": g})
    for f in rows_s:
        for c in PROBE_SCALARS:
            h = src.get(tuple(c * a for a in rows_s[f]))
            if h is not None and tgt.get(tuple(c * a for a in rows_t[T(f)])) != T(h):
                raise HypothesisFailed("linear", "Map is not homogeneous", {"f": f, "scalar": to_json_number(c)})


def _vanishes(family: FunctionFamily, f: int) -> bool:
    return any(not GaussianRational.coerce(v) for v in family.members[f])


def _sup_norm_squared(family: FunctionFamily, f: int) -> Fraction:
    return max((GaussianRational.coerce(v).norm_squared() for v in family.members[f]), default=Fraction(0))


def _check_density(family: FunctionFamily, density: Optional[Mapping[Hashable, Any]], label: str) -> Dict[Hashable, Fraction]:
    if density is None:
        raise DensityNotPositive("L¹ mode needs a density on both spaces", {"family": label})
    weights = {}
    for x in family.points:
        w = density.get(x)
        if w is None or Fraction(w) <= 0:
            raise DensityNotPositive("Density must be positive at every point", {"family": label, "point": x})
        weights[x] = Fraction(w)
    return weights


def l1_norm(values: Sequence[Any], weights: Sequence[Fraction]) -> Fraction:
    """``Σ |v| μ``; raises ModulusNotRational if some ``|v|`` is irrational."""
    return sum((GaussianRational.coerce(v).modulus() * w for v, w in zip(values, weights)), Fraction(0))


def _check_hypothesis(T: BlackBoxMap, mode: str, mu_x, mu_y) -> None:
    source, target = T.source, T.target
    for f in source.indices:
        if mode == "liwong" and _vanishes(source, f) != _vanishes(target, T(f)):
            raise HypothesisFailed("nonvanishing", "Map does not preserve non-vanishing functions", {"f": f})
        if mode == "banachstone" and _sup_norm_squared(source, f) != _sup_norm_squared(target, T(f)):
            raise HypothesisFailed("sup-isometry", "Map does not preserve the sup norm", {"f": f})
        if mode == "l1":
            lhs = l1_norm(source.members[f], [mu_x[x] for x in source.points])
            rhs = l1_norm(target.members[T(f)], [mu_y[y] for y in target.points])
            if lhs != rhs:
                raise HypothesisFailed("l1-isometry", "Map does not preserve the L¹ norm", {"f": f})
    if mode == "jarosz":
        for f, g in product(source.indices, repeat=2):
            if rel("perp", f, g, source) != rel("perp", T(f), T(g), target):
                raise HypothesisFailed("perp-iso", "Map does not preserve disjointness", {"f": f, "g": g})


def _block_weights(T: BlackBoxMap, phi: PointMap, b: int) -> Dict[Hashable, Any]:
    # weights read off the members supported inside supp(b) only
    source = T.source
    block = source.support(b)
    inside = [f for f in source.indices if source.support(f) <= block]
    weights = {}
    for y, x in phi.items():
        if x not in block:
            continue
        f = next((f for f in inside if source.value(f, x)), None)
        if f is not None:
            weights[y] = GaussianRational.coerce(T.image(f, y)) / source.value(f, x)
    return weights


def weighted_decompose(
    T: BlackBoxMap,
    mode: Mode,
    source_density: Optional[Mapping[Hashable, Any]] = None,
    target_density: Optional[Mapping[Hashable, Any]] = None,
) -> WeightedDecomposition:
    """
    Decompose a linear bijection as ``Tf(y) = p(y) f(φ(y))``.

    φ is read off the indicator probes: ``Tδ_x`` must be supported on the
    single point ``φ⁻¹(x)``. Per mode the hypothesis is checked first and
    the conclusion afterwards: ``|p| = 1`` for sup isometries,
    ``|p(y)| = μ_X(φ(y)) / μ_Y(y)`` for L¹ isometries, and agreement of
    the block-wise weights for disjointness-preserving maps.

    Raises:
        NotBijection: If T is not bijective
        HypothesisFailed: If the mode's hypothesis or linearity fails
        DensityNotPositive: On a missing or non-positive density (l1 mode)
        MissingIndicators: If an indicator is absent
        FormulaMismatch: If a conclusion fails on the instance
    """
    if mode not in MODES:
        raise InstanceFormatError(f"Unknown decomposition mode: {mode}")
    if not T.is_bijective():
        raise NotBijection("Map is not a bijection", {"mapping": list(T.mapping)})
    source, target = T.source, T.target
    mu_x = mu_y = None
    if mode == "l1":
        mu_x = _check_density(source, source_density, "source")
        mu_y = _check_density(target, target_density, "target")
    check_linear(T)
    _check_hypothesis(T, mode, mu_x, mu_y)

    phi: PointMap = {}
    for x in source.points:
        delta = _indicator_index(source, x)
        support = [y for y in target.points if GaussianRational.coerce(T.image(delta, y))]
        if len(support) != 1:
            raise FormulaMismatch("Image of an indicator is not supported on one point", {"point": x, "support": support})
        phi[support[0]] = x
    if len(phi) != len(target.points):
        raise FormulaMismatch("Indicator images do not cover the target", {"covered": sorted(phi, key=point_key)})
    phi = {y: phi[y] for y in target.points}
    p = {y: GaussianRational.coerce(T.image(_indicator_index(source, x), y)) for y, x in phi.items()}
    _check_formula(T, phi, p)
    result = WeightedDecomposition(phi, p, mode)

    if mode == "banachstone":
        for y, v in p.items():
            if v.norm_squared() != 1:
                raise FormulaMismatch("Weight of a sup isometry is not unimodular", {"y": y, "p": to_json_number(v)})
    elif mode == "l1":
        for y, x in phi.items():
            ratio = mu_x[x] / mu_y[y]
            if p[y].modulus() != ratio:
                raise FormulaMismatch(
                    "Weight modulus differs from the density ratio",
                    {"y": y, "p": to_json_number(p[y]), "ratio": to_json_number(ratio)},
                )
            result.ratio[y] = ratio
            result.unit[y] = p[y] / ratio
    elif mode == "jarosz":
        for b in source.indices:
            weights = _block_weights(T, phi, b)
            mismatch = [y for y, v in weights.items() if v != p[y]]
            if mismatch:
                raise FormulaMismatch("Block weights disagree with the global weight", {"block": b, "points": mismatch})
            result.blocks[b] = weights
    logger.debug(f"Decomposed map in mode {mode} over {len(phi)} points")
    return result


# Disjointness through the L¹ norm

@dataclass
class L1DisjointnessReport:
    disjoint: bool
    identity_holds: Dict[Tuple[int, int], bool]
    violating_probe: Optional[Tuple[GaussianRational, GaussianRational]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "disjoint": self.disjoint,
            "probes_holding": sum(self.identity_holds.values()),
            "violating_probe": None
            if self.violating_probe is None
            else [to_json_number(v) for v in self.violating_probe],
        }


def l1_disjointness(
    f: Sequence[Any],
    g: Sequence[Any],
    density: Sequence[Any],
) -> L1DisjointnessReport:
    """
    Pointwise disjointness versus ``‖Af+Bg‖₁ = |A|‖f‖₁ + |B|‖g‖₁``.

    With a positive density the identity holds iff ``|Af(x)+Bg(x)| =
    |Af(x)|+|Bg(x)|`` at every point, i.e. iff ``Af(x)·conj(Bg(x))`` is a
    non-negative real everywhere. This is decided exactly for every probe
    ``(A, B)`` in ``{1, i, -1, -i}²``. At a common point of the supports
    ``B = -A`` or ``B = A`` breaks the equality, so some probe always fails
    for non-disjoint pairs.

    Raises:
        DensityNotPositive: If some weight is not positive
        InstanceFormatError: If the sequences have different lengths
    """
    if not len(f) == len(g) == len(density):
        raise InstanceFormatError("Functions and density must share the point set")
    if any(Fraction(w) <= 0 for w in density):
        raise DensityNotPositive("Density must be positive at every point", {"density": [to_json_number(Fraction(w)) for w in density]})
    fs = [GaussianRational.coerce(v) for v in f]
    gs = [GaussianRational.coerce(v) for v in g]
    disjoint = all(not (a and b) for a, b in zip(fs, gs))

    holds = {}
    violating = None
    for ia, ib in product(range(len(UNIT_PHASES)), repeat=2):
        A, B = UNIT_PHASES[ia], UNIT_PHASES[ib]
        ok = True
        for a, b in zip(fs, gs):
            cross = (A * a) * (B * b).conjugate()
            if not (cross.is_real() and cross.re >= 0):
                ok = False
                break
        holds[ia, ib] = ok
        if not ok and violating is None:
            violating = (A, B)

    if disjoint and violating is not None:
        raise TheoremViolation("Disjoint pair violates the norm identity", {"probe": [to_json_number(v) for v in violating]})
    if not disjoint and violating is None:
        raise TheoremViolation("Overlapping pair satisfies every probe")
    return L1DisjointnessReport(disjoint, holds, violating)
