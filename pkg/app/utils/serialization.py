"""
JSON instance files.

Pydantic schemas for every instance file the command line reads, and
loaders that turn validated payloads into domain objects. Rationals are
written as ``"p/q"`` strings (or JSON integers), Gaussian rationals as
``{"re": "p/q", "im": "p/q"}``. Labels given as JSON lists become tuples.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Hashable, List, Literal, Optional, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.services.basicmaps import BlackBoxMap, make_map
from app.services.classify import make_chain_family
from app.services.fintop import FiniteSpace, discrete_space, make_space, space_from_basis
from app.services.funcrel import FunctionFamily, make_discrete_family, make_pl_family
from app.services.haarconv import (
    ConvolutionMap,
    HaarSystem,
    UnitMeasure,
    counting_system,
    make_convolution_map,
    make_measure,
    validate_haar,
)
from app.services.plspace import IntervalSet, closed, make_pl
from app.services.steinberg import (
    AlgebraMap,
    FiniteGroupoid,
    RingSpec,
    cyclic_group,
    make_algebra_map,
    make_groupoid,
    pair_groupoid,
    trivial_groupoid,
)
from app.services.stone import GenBoolAlg, make_algebra
from app.utils.errors import InstanceFormatError, PointOutOfSpace
from app.utils.exact import parse_gaussian, parse_rational

logger = logging.getLogger(__name__)

Schema = TypeVar("Schema", bound=BaseModel)

_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


class InstanceModel(BaseModel):
    """Base for instance schemas; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SpaceSchema(InstanceModel):
    points: List[Any]
    opens: Optional[List[List[Any]]] = None
    basis: Optional[List[List[Any]]] = None


class FamilySchema(InstanceModel):
    backend: Literal["discrete", "pl", "chain"] = "discrete"
    space: Optional[SpaceSchema] = None
    points: Optional[List[Any]] = None
    codomain: Optional[List[Any]] = None
    theta: Any = None
    members: List[Any]
    names: List[str] = []
    domain: Optional[List[List[Any]]] = None


class MapSchema(InstanceModel):
    mapping: Union[List[int], Dict[str, int]]
    declared: List[str] = []


class AlgebraSchema(InstanceModel):
    elements: List[Any]
    meet: List[List[Any]]
    join: List[List[Any]]
    zero: Any
    relative_complement: List[List[Any]] = []


class GroupoidSchema(InstanceModel):
    kind: Optional[Literal["pair", "cyclic", "trivial"]] = None
    points: Optional[List[Any]] = None
    order: Optional[int] = None
    elements: Optional[List[Any]] = None
    source: Optional[List[Any]] = None
    range_: Optional[List[Any]] = Field(default=None, alias="range")
    product: Optional[List[List[Any]]] = None


class RingSchema(InstanceModel):
    kind: Literal["modular", "integer", "product"]
    modulus: Optional[int] = None
    moduli: List[int] = []


class ArrowImageSchema(InstanceModel):
    arrow: Any
    generator: int = 0
    image: List[List[Any]]


class AlgebraMapSchema(InstanceModel):
    target_groupoid: Optional[GroupoidSchema] = None
    target_ring: Optional[Union[str, RingSchema]] = None
    images: List[ArrowImageSchema]


class HaarSchema(InstanceModel):
    counting: bool = False
    weights: List[List[Any]] = []


class MeasureSchema(InstanceModel):
    mass: List[List[Any]]


class DeclaredSchema(InstanceModel):
    phi: List[List[Any]]
    p: List[List[Any]]


class ConvolutionMapSchema(InstanceModel):
    target_groupoid: Optional[GroupoidSchema] = None
    target_haar: Optional[HaarSchema] = None
    target_measure: Optional[MeasureSchema] = None
    images: List[ArrowImageSchema]
    declared: Optional[DeclaredSchema] = None


class DensitySchema(InstanceModel):
    source: List[List[Any]]
    target: List[List[Any]]


# Reading

def read_json(path: Union[str, Path]) -> Any:
    """
    Read a JSON file.

    Raises:
        InstanceFormatError: If the file is missing or not valid JSON
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InstanceFormatError("Instance file not found", {"file": path.name})
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"Malformed JSON: {e.msg}", {"file": path.name, "line": e.lineno})


def validate(schema: Type[Schema], data: Any) -> Schema:
    """Validate a payload, reporting schema errors as InstanceFormatError."""
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        errors = [{"loc": [str(p) for p in err["loc"]], "msg": err["msg"]} for err in e.errors()]
        raise InstanceFormatError(f"Invalid {schema.__name__.replace('Schema', '').lower()} instance", {"errors": errors[:5]})


def label(value: Any) -> Hashable:
    """JSON label to a hashable Python value; lists become tuples."""
    if isinstance(value, list):
        return tuple(label(v) for v in value)
    if isinstance(value, dict):
        raise InstanceFormatError("Objects cannot be used as labels", {"label": str(value)})
    return value


def parse_value(value: Any) -> Hashable:
    """
    A function value: integers stay integers, ``"p/q"`` strings become
    rationals, ``{"re", "im"}`` objects Gaussian rationals, other strings
    stay labels.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return parse_rational(value)
    if isinstance(value, dict):
        return parse_gaussian(value)
    if isinstance(value, str) and _RATIONAL.match(value):
        number = parse_rational(value)
        return number.numerator if number.denominator == 1 else number
    return label(value)


def resolve(key: Any, points: Sequence[Hashable]) -> Hashable:
    """
    Match a JSON key against known labels; object keys arrive as strings.

    Raises:
        PointOutOfSpace: If no label matches
    """
    key = label(key)
    if key in points:
        return key
    text = key if isinstance(key, str) else json.dumps(key)
    for p in points:
        if str(p) == text or (isinstance(p, tuple) and json.dumps(list(p)) == text):
            return p
    raise PointOutOfSpace("Unknown label", {"label": str(key)})


def _pairs(rows: List[List[Any]], what: str) -> List[Tuple[Any, Any]]:
    bad = [row for row in rows if len(row) != 2]
    if bad:
        raise InstanceFormatError(f"{what} entries must be [key, value] pairs", {"entry": str(bad[0])})
    return [(row[0], row[1]) for row in rows]


def _triples(rows: List[List[Any]], what: str) -> List[Tuple[Hashable, Hashable, Hashable]]:
    bad = [row for row in rows if len(row) != 3]
    if bad:
        raise InstanceFormatError(f"{what} entries must be [left, right, result] triples", {"entry": str(bad[0])})
    return [(label(a), label(b), label(c)) for a, b, c in rows]


# Spaces and families

def load_space(data: Any) -> FiniteSpace:
    schema = data if isinstance(data, SpaceSchema) else validate(SpaceSchema, data)
    points = [label(p) for p in schema.points]
    if schema.opens is not None:
        return make_space(points, [[label(p) for p in u] for u in schema.opens])
    if schema.basis is not None:
        return space_from_basis(points, [[label(p) for p in u] for u in schema.basis])
    return discrete_space(points)


def _members(schema: FamilySchema, points: Sequence[Hashable]) -> List[Tuple]:
    rows = []
    for i, m in enumerate(schema.members):
        if isinstance(m, dict):
            values = {resolve(k, points): parse_value(v) for k, v in m.items()}
            missing = [p for p in points if p not in values]
            if missing:
                raise InstanceFormatError("Function is not total", {"member": i, "missing": [str(p) for p in missing]})
            rows.append(tuple(values[p] for p in points))
        elif isinstance(m, list):
            rows.append(tuple(parse_value(v) for v in m))
        else:
            raise InstanceFormatError("Member must be a list or an object", {"member": i})
    return rows


def _theta_index(theta: Any, rows: List[Tuple]) -> int:
    if theta is None:
        return 0
    if isinstance(theta, int) and not isinstance(theta, bool):
        return theta
    if isinstance(theta, list):
        row = tuple(parse_value(v) for v in theta)
        if row in rows:
            return rows.index(row)
        raise InstanceFormatError("θ is not a member", {"theta": [str(v) for v in row]})
    raise InstanceFormatError("θ must be an index or a member", {"theta": str(theta)})


def load_family(data: Any) -> FunctionFamily:
    """
    Build a family from ``{"backend", "space" | "points" | "domain", "members", ...}``.

    Raises:
        InstanceFormatError: On schema errors or invalid members
    """
    schema = validate(FamilySchema, data)
    if schema.backend == "pl":
        if not schema.domain:
            raise InstanceFormatError("PL family needs a domain")
        domain = IntervalSet.of(closed(parse_rational(lo), parse_rational(hi)) for lo, hi in schema.domain)
        members = []
        for i, m in enumerate(schema.members):
            if not isinstance(m, dict) or set(m) != {"breakpoints", "values"}:
                raise InstanceFormatError("PL member needs breakpoints and values", {"member": i})
            members.append(make_pl(domain, [parse_rational(b) for b in m["breakpoints"]], [parse_rational(v) for v in m["values"]]))
        return make_pl_family(domain, members, schema.names)

    if schema.space is not None:
        space = load_space(schema.space)
    elif schema.points is not None:
        space = discrete_space([label(p) for p in schema.points])
    else:
        raise InstanceFormatError("Discrete family needs a space or a point list")
    rows = _members(schema, space.ordered_points)
    if schema.backend == "chain":
        return make_chain_family(space, rows, schema.names)
    if schema.codomain is not None:
        codomain = [parse_value(v) for v in schema.codomain]
    else:
        codomain = list(dict.fromkeys(v for row in rows for v in row))
    return make_discrete_family(space, codomain, rows, _theta_index(schema.theta, rows), schema.names)


def load_map(data: Any, source: FunctionFamily, target: FunctionFamily) -> BlackBoxMap:
    schema = validate(MapSchema, data)
    return make_map(source, target, schema.mapping, schema.declared)


def load_point_map(data: Any, domain_points: Sequence[Hashable], image_points: Sequence[Hashable]) -> Dict[Hashable, Hashable]:
    """``{"y": x, ...}`` or ``[[y, x], ...]`` as a point map."""
    if isinstance(data, dict) and "phi" in data:
        data = data["phi"]
    items = data.items() if isinstance(data, dict) else _pairs(data, "Point map")
    return {resolve(y, domain_points): resolve(x, image_points) for y, x in items}


def load_density(data: Any, source: FunctionFamily, target: FunctionFamily) -> Tuple[Dict, Dict]:
    schema = validate(DensitySchema, data)
    mu_x = {resolve(x, source.points): parse_rational(w) for x, w in _pairs(schema.source, "Density")}
    mu_y = {resolve(y, target.points): parse_rational(w) for y, w in _pairs(schema.target, "Density")}
    return mu_x, mu_y


# Boolean algebras

def load_algebra(data: Any) -> GenBoolAlg:
    schema = validate(AlgebraSchema, data)
    elements = [label(e) for e in schema.elements]
    meet = {(a, b): c for a, b, c in _triples(schema.meet, "Meet")}
    join = {(a, b): c for a, b, c in _triples(schema.join, "Join")}
    diff = {(b, a): c for b, a, c in _triples(schema.relative_complement, "Relative complement")}
    return make_algebra(elements, meet, join, label(schema.zero), diff or None)


# Groupoids and rings

def load_groupoid(data: Any) -> FiniteGroupoid:
    """
    Build a groupoid from explicit tables or a named shape.

    Explicit form: ``elements``, ``source`` and ``range`` arrays aligned with
    the elements, and ``product`` triples ``[a, b, ab]``.
    """
    schema = data if isinstance(data, GroupoidSchema) else validate(GroupoidSchema, data)
    if schema.kind == "pair":
        return pair_groupoid([label(p) for p in schema.points or []])
    if schema.kind == "cyclic":
        if not schema.order:
            raise InstanceFormatError("Cyclic groupoid needs an order")
        return cyclic_group(schema.order)
    if schema.kind == "trivial":
        return trivial_groupoid()
    if schema.elements is None or schema.source is None or schema.range_ is None or schema.product is None:
        raise InstanceFormatError("Groupoid needs elements, source, range and product")
    elements = [label(e) for e in schema.elements]
    if not len(elements) == len(schema.source) == len(schema.range_):
        raise InstanceFormatError("Source and range must align with the elements", {"elements": len(elements)})
    source = {a: label(s) for a, s in zip(elements, schema.source)}
    range_ = {a: label(r) for a, r in zip(elements, schema.range_)}
    product_ = {(a, b): c for a, b, c in _triples(schema.product, "Product")}
    return make_groupoid(elements, source, range_, product_)


def load_ring(data: Any) -> RingSpec:
    """A ring from ``"Z"``, ``"Z/5"``, ``"Z/2xZ/3"`` or a ``{"kind": ...}`` object."""
    if isinstance(data, str):
        text = data.replace(" ", "")
        if text == "Z":
            return RingSpec.integer()
        parts = text.split("x")
        moduli = []
        for part in parts:
            match = re.fullmatch(r"Z/(\d+)", part)
            if not match:
                raise InstanceFormatError("Unknown ring", {"ring": data})
            moduli.append(int(match.group(1)))
        return RingSpec.modular(moduli[0]) if len(moduli) == 1 else RingSpec.product(*moduli)
    schema = data if isinstance(data, RingSchema) else validate(RingSchema, data)
    if schema.kind == "integer":
        return RingSpec.integer()
    if schema.kind == "modular":
        if schema.modulus is None:
            raise InstanceFormatError("Modular ring needs a modulus")
        return RingSpec.modular(schema.modulus)
    return RingSpec.product(*schema.moduli)


def _ring_value(value: Any, R: RingSpec) -> Any:
    if isinstance(value, list):
        return R.normalize(tuple(int(parse_rational(v)) for v in value))
    number = parse_rational(value)
    if number.denominator != 1:
        raise InstanceFormatError("Ring values must be integers", {"value": str(value)})
    return R.normalize(number.numerator)


def load_algebra_map(data: Any, G: FiniteGroupoid, R: RingSpec) -> AlgebraMap:
    """
    A map of Steinberg algebras stored on generator indicators.

    Each entry ``{"arrow": a, "generator": i, "image": [[b, value], ...]}``
    gives ``T(g_i·1_a)``. The target defaults to ``(G, R)``.
    """
    schema = validate(AlgebraMapSchema, data)
    H = load_groupoid(schema.target_groupoid) if schema.target_groupoid is not None else G
    S = load_ring(schema.target_ring) if schema.target_ring is not None else R
    images = {}
    for entry in schema.images:
        a = resolve(entry.arrow, G.elements)
        images[a, entry.generator] = {resolve(b, H.elements): _ring_value(v, S) for b, v in _pairs(entry.image, "Image")}
    return make_algebra_map(G, R, H, S, images)


# Haar systems and measured maps

def load_haar(data: Any, G: FiniteGroupoid) -> HaarSystem:
    schema = data if isinstance(data, HaarSchema) else validate(HaarSchema, data)
    if schema.counting:
        return counting_system(G)
    return validate_haar(G, {resolve(a, G.elements): parse_rational(w) for a, w in _pairs(schema.weights, "Haar weight")})


def load_measure(data: Any, G: FiniteGroupoid) -> UnitMeasure:
    schema = data if isinstance(data, MeasureSchema) else validate(MeasureSchema, data)
    return make_measure(G, {resolve(x, G.units): parse_rational(m) for x, m in _pairs(schema.mass, "Mass")})


@dataclass
class MeasuredMapInstance:
    """A loaded convolution map with its optional target measure and declared data."""

    T: ConvolutionMap
    target_measure: Optional[UnitMeasure] = None
    declared: Optional[Tuple[Dict[Any, Any], Dict[Any, Any]]] = None


def load_convolution_map(data: Any, source: HaarSystem) -> MeasuredMapInstance:
    """
    A map ``C_c(G) → C_c(H)`` from the images of the indicators ``1_a``.

    The target groupoid and Haar system default to the source ones.
    """
    schema = validate(ConvolutionMapSchema, data)
    H = load_groupoid(schema.target_groupoid) if schema.target_groupoid is not None else source.G
    target = load_haar(schema.target_haar, H) if schema.target_haar is not None else (source if H is source.G else counting_system(H))
    images = {
        resolve(entry.arrow, source.G.elements): {resolve(h, H.elements): parse_gaussian(v) for h, v in _pairs(entry.image, "Image")}
        for entry in schema.images
    }
    T = make_convolution_map(source, target, images)
    measure = load_measure(schema.target_measure, H) if schema.target_measure is not None else None
    declared = None
    if schema.declared is not None:
        phi = {resolve(h, H.elements): resolve(a, source.G.elements) for h, a in _pairs(schema.declared.phi, "Declared φ")}
        p = {resolve(h, H.elements): parse_gaussian(v) for h, v in _pairs(schema.declared.p, "Declared p")}
        declared = (phi, p)
    logger.debug(f"Loaded convolution map on {len(source.G)} arrows")
    return MeasuredMapInstance(T=T, target_measure=measure, declared=declared)
