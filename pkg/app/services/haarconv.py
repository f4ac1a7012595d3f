"""
Haar systems, weighted convolution and isometric algebra isomorphisms.

A left Haar system on a finite groupoid is a positive weight on every
arrow, ``λ(a) = λ^{r(a)}({a})``, with ``λ(ab) = λ(b)`` on composable
pairs. Elements of ``C_c(G)`` are Gaussian-rational functions on the
arrows. Isomorphisms are stored by the images of the indicators ``1_a``
and decomposed as ``Tf(h) = p(h)·D(φ(h))·f(φ(h))``.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from app.services.steinberg import Arrow, FiniteGroupoid
from app.utils.errors import (
    HypothesisFailed,
    InstanceFormatError,
    InvarianceViolation,
    ModulusNotRational,
    NotBijection,
    NotFullySupported,
)
from app.utils.exact import UNIT_PHASES, GaussianRational, to_json_number

logger = logging.getLogger(__name__)

Element = Tuple[GaussianRational, ...]
ZERO = GaussianRational(0)
ONE = GaussianRational(1)


@dataclass(frozen=True, eq=False)
class HaarSystem:
    """Validated left Haar system ``a ↦ λ^{r(a)}({a})``."""

    G: FiniteGroupoid
    weights: Dict[Arrow, Fraction]

    def __call__(self, a: Arrow) -> Fraction:
        return self.weights[a]

    def fiber(self, x: Arrow) -> List[Arrow]:
        """Arrows with range x."""
        return [a for a in self.G.elements if self.G.range[a] == x]

    def to_dict(self) -> Dict[str, Any]:
        return {str(a): to_json_number(self.weights[a]) for a in self.G.elements}


@dataclass(frozen=True, eq=False)
class UnitMeasure:
    G: FiniteGroupoid
    mass: Dict[Arrow, Fraction]

    def __call__(self, x: Arrow) -> Fraction:
        return self.mass[x]

    def to_dict(self) -> Dict[str, Any]:
        return {str(x): to_json_number(self.mass[x]) for x in self.G.units}


def validate_haar(G: FiniteGroupoid, weights: Mapping[Arrow, Any]) -> HaarSystem:
    """
    Check support, full support and left invariance.

    Args:
        G: The groupoid
        weights: Rational weight of every arrow

    Returns:
        HaarSystem: The validated system

    Raises:
        InstanceFormatError: If an arrow has no weight or an unknown arrow has one
        NotFullySupported: If some weight is not positive
        InvarianceViolation: With the composable pair where ``λ(ab) ≠ λ(b)``
    """
    unknown = [str(a) for a in weights if a not in G.position]
    missing = [str(a) for a in G.elements if a not in weights]
    if unknown or missing:
        raise InstanceFormatError("Weights must be given on exactly the arrows", {"unknown": unknown, "missing": missing})
    table = {a: Fraction(weights[a]) for a in G.elements}
    for a, w in table.items():
        if w <= 0:
            raise NotFullySupported("Haar weight is not positive", {"arrow": str(a), "weight": to_json_number(w)})
    for (a, b), ab in G.product.items():
        if table[ab] != table[b]:
            raise InvarianceViolation(
                "Left invariance fails",
                {"pair": [str(a), str(b)], "product_weight": to_json_number(table[ab]), "weight": to_json_number(table[b])},
            )
    return HaarSystem(G, table)


def counting_system(G: FiniteGroupoid) -> HaarSystem:
    return validate_haar(G, {a: 1 for a in G.elements})


def make_measure(G: FiniteGroupoid, mass: Mapping[Arrow, Any]) -> UnitMeasure:
    """
    Raises:
        InstanceFormatError: If the masses are not given on exactly the units
        NotFullySupported: If some mass is not positive
    """
    if set(mass) != set(G.units):
        raise InstanceFormatError("Masses must be given on exactly the units", {"units": [str(x) for x in G.units]})
    table = {x: Fraction(mass[x]) for x in G.units}
    for x, m in table.items():
        if m <= 0:
            raise NotFullySupported("Unit mass is not positive", {"unit": str(x), "mass": to_json_number(m)})
    return UnitMeasure(G, table)


def is_etale_constant(system: HaarSystem) -> bool:
    """``a ↦ λ(a)`` is constant on every ``G_x^y``."""
    G = system.G
    seen: Dict[Tuple[Arrow, Arrow], Fraction] = {}
    for a in G.elements:
        key = (G.source[a], G.range[a])
        if seen.setdefault(key, system(a)) != system(a):
            return False
    return True


def pushforward_measure(phi: Mapping[Arrow, Arrow], measure: UnitMeasure, G: FiniteGroupoid) -> UnitMeasure:
    """``φ_*μ`` on the units of G for ``φ: H → G``."""
    return UnitMeasure(G, {phi[y]: m for y, m in measure.mass.items()})


# Elements and norms

def make_element(G: FiniteGroupoid, values: Mapping[Arrow, Any]) -> Element:
    stray = [str(a) for a in values if a not in G.position]
    if stray:
        raise InstanceFormatError("Value on an unknown arrow", {"arrows": stray})
    return tuple(GaussianRational.coerce(values.get(a, ZERO)) for a in G.elements)


def basis_element(G: FiniteGroupoid, a: Arrow, value: Any = ONE) -> Element:
    return tuple(GaussianRational.coerce(value) if b == a else ZERO for b in G.elements)


def weighted_convolve(f: Element, g: Element, G: FiniteGroupoid, system: HaarSystem) -> Element:
    """``(f·g)(a) = Σ_{s ∈ G^{r(a)}} f(s)·g(s⁻¹a)·λ(s)``."""
    out = [ZERO] * len(G)
    weights = [system(a) for a in G.elements]
    for i, j, k in G.composable:
        if f[i] and g[j]:
            out[k] = out[k] + f[i] * g[j] * weights[i]
    return tuple(out)


def fiber_norm(f: Element, x: Arrow, system: HaarSystem) -> Fraction:
    """``∫ |f| dλ^x``."""
    G = system.G
    return sum((f[G.position[a]].modulus() * system(a) for a in system.fiber(x)), Fraction(0))


def l1_norm(f: Element, system: HaarSystem, measure: UnitMeasure) -> Fraction:
    """L¹ norm of ``λ∘μ``.

    Raises:
        ModulusNotRational: If a value has an irrational modulus
    """
    return sum((measure(x) * fiber_norm(f, x, system) for x in system.G.units), Fraction(0))


def ir_norm(f: Element, system: HaarSystem) -> Fraction:
    """(I,r)-norm: the largest fiber norm.

    Raises:
        ModulusNotRational: If a value has an irrational modulus
    """
    return max((fiber_norm(f, x, system) for x in system.G.units), default=Fraction(0))


def support(f: Element, G: FiniteGroupoid) -> List[Arrow]:
    return [a for a, v in zip(G.elements, f) if v]


# Maps

@dataclass(frozen=True, eq=False)
class ConvolutionMap:
    """Linear map ``C_c(G) → C_c(H)`` given by the images of ``1_a``."""

    source: HaarSystem
    target: HaarSystem
    images: Dict[Arrow, Element]

    def __call__(self, f: Element) -> Element:
        H = self.target.G
        out = [ZERO] * len(H)
        for a, value in zip(self.source.G.elements, f):
            if value:
                for k, v in enumerate(self.images[a]):
                    if v:
                        out[k] = out[k] + value * v
        return tuple(out)

    def with_image(self, a: Arrow, image: Element) -> "ConvolutionMap":
        return ConvolutionMap(self.source, self.target, {**self.images, a: image})

    def to_dict(self) -> Dict[str, Any]:
        H = self.target.G
        return {
            str(a): {str(h): to_json_number(v) for h, v in zip(H.elements, self.images[a]) if v}
            for a in self.source.G.elements
        }


def make_convolution_map(source: HaarSystem, target: HaarSystem, images: Mapping[Arrow, Mapping[Arrow, Any]]) -> ConvolutionMap:
    """
    Raises:
        InstanceFormatError: If an indicator image is missing
    """
    missing = [str(a) for a in source.G.elements if a not in images]
    if missing:
        raise InstanceFormatError("Missing image of an indicator", {"arrows": missing})
    return ConvolutionMap(source, target, {a: make_element(target.G, images[a]) for a in source.G.elements})


def radon_nikodym(phi: Mapping[Arrow, Arrow], source: HaarSystem, target: HaarSystem) -> Dict[Arrow, Fraction]:
    """``D(a) = λ_G(a) / λ_H(φ⁻¹(a))`` for ``φ: H → G``."""
    return {phi[h]: source(phi[h]) / target(h) for h in target.G.elements}


def build_measured_map(
    phi: Mapping[Arrow, Arrow],
    p: Mapping[Arrow, Any],
    source: HaarSystem,
    target: HaarSystem,
) -> ConvolutionMap:
    """
    ``Tf(h) = p(h)·D(φ(h))·f(φ(h))``.

    Raises:
        NotBijection: If φ is not a bijection ``H → G``
    """
    G, H = source.G, target.G
    if set(phi) != set(H.elements) or {phi[h] for h in H.elements} != set(G.elements) or len(G) != len(H):
        raise NotBijection("Arrow map is not a bijection", {"size": len(phi)})
    D = radon_nikodym(phi, source, target)
    images = {phi[h]: basis_element(H, h, GaussianRational.coerce(p[h]) * D[phi[h]]) for h in H.elements}
    return ConvolutionMap(source, target, images)


@dataclass
class MeasuredDecomposition:
    """Recovered data of an isometric isomorphism and the checked conclusions."""

    norm: str
    phi: Dict[Arrow, Arrow]
    P: Dict[Arrow, GaussianRational]
    D: Dict[Arrow, Fraction]
    p: Dict[Arrow, GaussianRational]
    checks: Dict[str, bool]
    witnesses: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "norm": self.norm,
            "phi": {str(h): str(a) for h, a in self.phi.items()},
            "D": {str(a): to_json_number(v) for a, v in self.D.items()},
            "p": {str(h): to_json_number(v) for h, v in self.p.items()},
            "checks": self.checks,
            "witnesses": self.witnesses,
        }


def _probes(G: FiniteGroupoid) -> List[Element]:
    probes = [basis_element(G, a) for a in G.elements]
    for a, b in combinations(G.elements, 2):
        for u in UNIT_PHASES:
            probes.append(tuple(ONE if c == a else u if c == b else ZERO for c in G.elements))
    return probes


def _same_norm(target_norm: Callable[[], Fraction], source_norm: Fraction) -> bool:
    # Probe norms on the source are rational; a sum of positive moduli with an
    # irrational term is irrational.
    try:
        return target_norm() == source_norm
    except ModulusNotRational:
        return False


def _check_algebra_iso(T: ConvolutionMap) -> None:
    G, H = T.source.G, T.target.G
    for a in G.elements:
        for b in G.elements:
            lhs = T(weighted_convolve(basis_element(G, a), basis_element(G, b), G, T.source))
            rhs = weighted_convolve(T.images[a], T.images[b], H, T.target)
            if lhs != rhs:
                raise HypothesisFailed("algebra", "Map does not preserve convolution", {"pair": [str(a), str(b)]})


def _recover(T: ConvolutionMap) -> Tuple[Dict[Arrow, Arrow], Dict[Arrow, GaussianRational]]:
    G, H = T.source.G, T.target.G
    phi, P = {}, {}
    for a in G.elements:
        supp = support(T.images[a], H)
        if len(supp) != 1:
            raise HypothesisFailed("isomorphism", "Image of an indicator is not supported on one arrow", {"arrow": str(a), "support": [str(h) for h in supp]})
        h = supp[0]
        if h in phi:
            raise HypothesisFailed("isomorphism", "Two indicators share an image support", {"arrows": [str(phi[h]), str(a)]})
        phi[h] = a
        P[h] = T.images[a][H.position[h]]
    if len(phi) != len(H):
        raise HypothesisFailed("isomorphism", "Map is not surjective", {"covered": len(phi), "size": len(H)})
    return phi, P


def _conclusions(
    T: ConvolutionMap, phi: Dict[Arrow, Arrow], P: Dict[Arrow, GaussianRational], norm: str
) -> MeasuredDecomposition:
    G, H = T.source.G, T.target.G
    witnesses: List[Dict[str, Any]] = []
    checks = {}

    groupoid_iso = True
    for b in H.elements:
        for c in H.elements:
            bc = H.product.get((b, c))
            image = G.product.get((phi[b], phi[c]))
            if (bc is None) != (image is None) or (bc is not None and phi[bc] != image):
                groupoid_iso = False
                witnesses.append({"check": "groupoid_iso", "pair": [str(b), str(c)]})
    checks["groupoid_iso"] = groupoid_iso

    D = radon_nikodym(phi, T.source, T.target)
    invariant = True
    for (a, g), ag in G.product.items():
        if D[ag] != D[g]:
            invariant = False
            witnesses.append({"check": "derivative_invariance", "pair": [str(a), str(g)]})
    checks["derivative_invariance"] = invariant

    p = {h: P[h] / D[phi[h]] for h in H.elements}
    unimodular = True
    for h, value in p.items():
        if value.norm_squared() != 1:
            unimodular = False
            witnesses.append({"check": "unimodular", "arrow": str(h), "value": to_json_number(value)})
    checks["unimodular"] = unimodular

    morphism = True
    for (b, c), bc in H.product.items():
        if p[bc] != p[b] * p[c]:
            morphism = False
            witnesses.append({"check": "morphism", "pair": [str(b), str(c)]})
    checks["morphism"] = morphism
    return MeasuredDecomposition(norm, phi, P, D, p, checks, witnesses)


def _check_declared(report: MeasuredDecomposition, declared: Optional[Tuple[Mapping, Mapping]]) -> None:
    if declared is None:
        return
    phi, p = declared
    same = dict(phi) == report.phi and all(GaussianRational.coerce(p[h]) == report.p[h] for h in report.p)
    report.checks["declared_data"] = same
    if not same:
        report.witnesses.append({"check": "declared_data"})


def verify_measured_decomposition(
    T: ConvolutionMap,
    source_measure: UnitMeasure,
    target_measure: UnitMeasure,
    declared: Optional[Tuple[Mapping, Mapping]] = None,
) -> MeasuredDecomposition:
    """
    Decompose an L¹-isometric algebra isomorphism.

    Checks that φ is a groupoid isomorphism, that the derivative is
    invariant, that ``p = P/(D∘φ)`` is a unimodular morphism, and that
    ``μ_G = φ_*μ_H``.

    Args:
        T: The map, stored on indicators
        source_measure: ``μ_G``
        target_measure: ``μ_H``
        declared: Optional ``(φ, p)`` to compare with the recovered data

    Returns:
        MeasuredDecomposition: Data and per-check verdicts with witnesses

    Raises:
        HypothesisFailed: If T is not an isometric algebra isomorphism
    """
    _check_algebra_iso(T)
    phi, P = _recover(T)
    G = T.source.G
    for f in _probes(G):
        if not _same_norm(lambda: l1_norm(T(f), T.target, target_measure), l1_norm(f, T.source, source_measure)):
            raise HypothesisFailed("isometry", "Map is not L1-isometric", {"probe": [to_json_number(v) for v in f]})
    report = _conclusions(T, phi, P, "l1")
    pushed = pushforward_measure(phi, target_measure, G)
    equal = all(pushed(x) == source_measure(x) for x in G.units)
    report.checks["measure_pushforward"] = equal
    if not equal:
        report.witnesses.append({"check": "measure_pushforward", "source": source_measure.to_dict(), "pushed": pushed.to_dict()})
    _check_declared(report, declared)
    logger.debug(f"L1 decomposition checks: {report.checks}")
    return report


def verify_ir_decomposition(
    T: ConvolutionMap,
    declared: Optional[Tuple[Mapping, Mapping]] = None,
) -> MeasuredDecomposition:
    """
    Decompose a diagonal-preserving (I,r)-isometric algebra isomorphism.

    Fiber norms are compared exactly through the elements ``e_x·f`` where
    ``e_x = 1_x/λ(x)`` is the idempotent at the unit x.

    Raises:
        HypothesisFailed: If T is not a diagonal-preserving isometric
            algebra isomorphism
    """
    G, H = T.source.G, T.target.G
    _check_algebra_iso(T)
    phi, P = _recover(T)
    for x in G.units:
        off = [str(h) for h in support(T.images[x], H) if not H.is_unit(h)]
        if off:
            raise HypothesisFailed("diagonal", "Map sends a diagonal element outside the diagonal", {"unit": str(x), "support": off})
    idempotents = [basis_element(G, x, GaussianRational(1 / T.source(x))) for x in G.units]
    for f in _probes(G):
        for e in [None] + idempotents:
            g = f if e is None else weighted_convolve(e, f, G, T.source)
            if not _same_norm(lambda: ir_norm(T(g), T.target), ir_norm(g, T.source)):
                raise HypothesisFailed("isometry", "Map is not (I,r)-isometric", {"probe": [to_json_number(v) for v in g]})
    report = _conclusions(T, phi, P, "ir")
    _check_declared(report, declared)
    logger.debug(f"(I,r) decomposition checks: {report.checks}")
    return report
