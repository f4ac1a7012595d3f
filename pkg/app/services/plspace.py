"""
Exact rational piecewise-linear functions.

Sets on the real line are finite unions of rational intervals with open or
closed ends. Every set operation runs on a cell decomposition: the sorted
endpoints split the line into points and open gaps, membership is constant
on each cell, and the result is rebuilt from maximal runs of member cells.
Functions are continuous and linear between consecutive breakpoints on
each component of a compact domain. All arithmetic uses ``Fraction``.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from app.utils.errors import (
    DensityNotPositive,
    DomainMismatch,
    GapEmpty,
    InstanceFormatError,
    NotPiecewiseLinear,
    PointOutOfSpace,
    RegionsOverlap,
    TheoremViolation,
)
from app.utils.exact import format_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interval:
    """A non-empty rational interval; ends are open or closed."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise InstanceFormatError(
                "Empty interval",
                {"lo": format_rational(self.lo), "hi": format_rational(self.hi)},
            )

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    @property
    def is_closed(self) -> bool:
        return self.lo_closed and self.hi_closed

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_rational(self.lo)},{format_rational(self.hi)}{right}"


def closed(lo, hi) -> Interval:
    return Interval(Fraction(lo), Fraction(hi), True, True)


def open_interval(lo, hi) -> Interval:
    return Interval(Fraction(lo), Fraction(hi), False, False)


# A cell is ("point", p, p) or ("gap", left, right); left/right None means unbounded.
Cell = Tuple[str, Optional[Fraction], Optional[Fraction]]


def _cells(points: Sequence[Fraction]) -> List[Cell]:
    if not points:
        return [("gap", None, None)]
    cells: List[Cell] = [("gap", None, points[0])]
    for i, p in enumerate(points):
        cells.append(("point", p, p))
        right = points[i + 1] if i + 1 < len(points) else None
        cells.append(("gap", p, right))
    return cells


def _sample(cell: Cell) -> Fraction:
    kind, left, right = cell
    if kind == "point":
        return left
    if left is None and right is None:
        return Fraction(0)
    if left is None:
        return right - 1
    if right is None:
        return left + 1
    return (left + right) / 2


@dataclass(frozen=True)
class IntervalSet:
    """A normalized finite union of disjoint, sorted, non-touching intervals."""

    intervals: Tuple[Interval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[Interval]) -> "IntervalSet":
        items = list(intervals)
        points = sorted({e for iv in items for e in (iv.lo, iv.hi)})
        cells = _cells(points)
        flags = [any(iv.contains(_sample(c)) for iv in items) for c in cells]
        return cls._from_cells(cells, flags)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple]) -> "IntervalSet":
        return cls.of(closed(lo, hi) for lo, hi in pairs)

    @classmethod
    def point(cls, p) -> "IntervalSet":
        return cls.of([closed(p, p)])

    @classmethod
    def _from_cells(cls, cells: List[Cell], flags: List[bool]) -> "IntervalSet":
        intervals = []
        start: Optional[Cell] = None
        previous: Optional[Cell] = None
        for cell, flag in zip(cells, flags):
            if flag and start is None:
                start = cell
            if not flag and start is not None:
                intervals.append(cls._run(start, previous))
                start = None
            previous = cell
        if start is not None:
            intervals.append(cls._run(start, previous))
        return cls(tuple(intervals))

    @staticmethod
    def _run(start: Cell, end: Cell) -> Interval:
        if start[1] is None or end[2] is None:
            raise InstanceFormatError("Unbounded interval set")
        lo, lo_closed = (start[1], True) if start[0] == "point" else (start[1], False)
        hi, hi_closed = (end[1], True) if end[0] == "point" else (end[2], False)
        return Interval(lo, hi, lo_closed, hi_closed)

    def endpoints(self) -> List[Fraction]:
        return sorted({e for iv in self.intervals for e in (iv.lo, iv.hi)})

    def contains(self, x) -> bool:
        x = Fraction(x)
        return any(iv.contains(x) for iv in self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def _combine(self, others: Sequence["IntervalSet"], op: Callable[..., bool]) -> "IntervalSet":
        points = sorted(set(self.endpoints()).union(*(o.endpoints() for o in others)))
        cells = _cells(points)
        flags = []
        for cell in cells:
            x = _sample(cell)
            flags.append(op(self.contains(x), *(o.contains(x) for o in others)))
        return IntervalSet._from_cells(cells, flags)

    def union(self, *others: "IntervalSet") -> "IntervalSet":
        return self._combine(others, lambda *flags: any(flags))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return self._combine([other], lambda a, b: a and b)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self._combine([other], lambda a, b: a and not b)

    def is_subset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    def is_disjoint(self, other: "IntervalSet") -> bool:
        return self.intersection(other).is_empty()

    def closure(self) -> "IntervalSet":
        cells = _cells(self.endpoints())
        member = [self.contains(_sample(c)) for c in cells]
        flags = []
        for i, cell in enumerate(cells):
            if cell[0] == "point":
                flags.append(member[i] or member[i - 1] or member[i + 1])
            else:
                flags.append(member[i])
        return IntervalSet._from_cells(cells, flags)

    def interior(self, relative_to: Optional["IntervalSet"] = None) -> "IntervalSet":
        """
        Interior of the set, optionally relative to an ambient domain.

        Relative to a domain ``D`` a point is interior when each side is
        either inside the set or outside ``D``.
        """
        points = self.endpoints()
        if relative_to is not None:
            points = sorted(set(points) | set(relative_to.endpoints()))
        cells = _cells(points)
        member = [self.contains(_sample(c)) for c in cells]
        if relative_to is None:
            ambient = [True] * len(cells)
        else:
            ambient = [relative_to.contains(_sample(c)) for c in cells]
        flags = []
        for i, cell in enumerate(cells):
            if cell[0] == "point":
                left_ok = member[i - 1] or not ambient[i - 1]
                right_ok = member[i + 1] or not ambient[i + 1]
                flags.append(member[i] and left_ok and right_ok)
            else:
                flags.append(member[i])
        return IntervalSet._from_cells(cells, flags)

    def is_open_in(self, domain: "IntervalSet") -> bool:
        return self.is_subset(domain) and self.interior(relative_to=domain) == self

    def sample_point(self) -> Optional[Fraction]:
        if not self.intervals:
            return None
        first = self.intervals[0]
        if first.lo_closed:
            return first.lo
        return (first.lo + first.hi) / 2

    def component_of(self, x) -> Optional[Interval]:
        x = Fraction(x)
        for iv in self.intervals:
            if iv.contains(x):
                return iv
        return None

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " ∪ ".join(str(iv) for iv in self.intervals)

    def to_list(self) -> List[str]:
        return [str(iv) for iv in self.intervals]


EMPTY = IntervalSet()


@dataclass(frozen=True)
class PLFunction:
    """A continuous piecewise-linear function on a compact union of closed intervals."""

    domain: IntervalSet
    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]

    def __call__(self, x) -> Fraction:
        return self.evaluate(x)

    def evaluate(self, x) -> Fraction:
        x = Fraction(x)
        if not self.domain.contains(x):
            raise PointOutOfSpace("Point outside the function domain", {"point": format_rational(x)})
        for i, b in enumerate(self.breakpoints):
            if b == x:
                return self.values[i]
            if b > x:
                a, va, vb = self.breakpoints[i - 1], self.values[i - 1], self.values[i]
                return va + (vb - va) * (x - a) / (b - a)
        raise PointOutOfSpace("Point outside the breakpoint range", {"point": format_rational(x)})

    def segments(self) -> List[Tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Consecutive breakpoint pairs ``(a, f(a), b, f(b))`` that lie in one domain component."""
        result = []
        for i in range(len(self.breakpoints) - 1):
            a, b = self.breakpoints[i], self.breakpoints[i + 1]
            if self.domain.contains((a + b) / 2):
                result.append((a, self.values[i], b, self.values[i + 1]))
        return result

    def to_dict(self) -> dict:
        return {
            "domain": [[format_rational(iv.lo), format_rational(iv.hi)] for iv in self.domain.intervals],
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "values": [format_rational(v) for v in self.values],
        }


def make_pl(domain: IntervalSet, breakpoints: Sequence, values: Sequence) -> PLFunction:
    """
    Build and validate a PL function.

    Raises:
        InstanceFormatError: If the domain is not a union of closed intervals,
            breakpoints are unsorted, miss a domain endpoint or leave the domain
    """
    bps = tuple(Fraction(b) for b in breakpoints)
    vals = tuple(Fraction(v) for v in values)
    if domain.is_empty() or not all(iv.is_closed for iv in domain.intervals):
        raise InstanceFormatError("PL domain must be a non-empty union of closed intervals", {"domain": domain.to_list()})
    if len(bps) != len(vals):
        raise InstanceFormatError("Breakpoints and values differ in length", {"breakpoints": len(bps), "values": len(vals)})
    if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
        raise InstanceFormatError("Breakpoints must be strictly increasing")
    missing = [e for e in domain.endpoints() if e not in set(bps)]
    if missing:
        raise InstanceFormatError("Breakpoints must include every domain endpoint", {"missing": [format_rational(m) for m in missing]})
    stray = [b for b in bps if not domain.contains(b)]
    if stray:
        raise InstanceFormatError("Breakpoint outside the domain", {"breakpoints": [format_rational(s) for s in stray]})
    return PLFunction(domain, bps, vals)


def zero_function(domain: IntervalSet) -> PLFunction:
    endpoints = domain.endpoints()
    return make_pl(domain, endpoints, [0] * len(endpoints))


def from_callable(domain: IntervalSet, breakpoints: Iterable, fn: Callable[[Fraction], Fraction]) -> PLFunction:
    """Sample ``fn`` at the given breakpoints plus the domain endpoints."""
    points = sorted({Fraction(b) for b in breakpoints if domain.contains(b)} | set(domain.endpoints()))
    return make_pl(domain, points, [fn(p) for p in points])


def _merged_points(*functions: PLFunction) -> List[Fraction]:
    return sorted({b for f in functions for b in f.breakpoints})


def _same_domain(f: PLFunction, g: PLFunction) -> None:
    if f.domain != g.domain:
        raise DomainMismatch("Functions live on different domains", {"left": f.domain.to_list(), "right": g.domain.to_list()})


def nonzero_set(f: PLFunction) -> IntervalSet:
    """``[f ≠ 0]`` from sign analysis on each segment."""
    pieces: List[Interval] = []
    for b, v in zip(f.breakpoints, f.values):
        if v != 0:
            pieces.append(closed(b, b))
    for a, va, b, vb in f.segments():
        if va == 0 and vb == 0:
            continue
        if va * vb < 0:
            root = a + va * (b - a) / (va - vb)
            pieces.append(open_interval(a, root))
            pieces.append(open_interval(root, b))
        else:
            pieces.append(open_interval(a, b))
    return IntervalSet.of(pieces)


def pl_support(f: PLFunction) -> IntervalSet:
    return nonzero_set(f).closure()


def pl_sigma(f: PLFunction) -> IntervalSet:
    """Interior of the support relative to the domain."""
    return pl_support(f).interior(relative_to=f.domain)


def pl_zero_set(f: PLFunction) -> IntervalSet:
    return f.domain.difference(pl_support(f))


def pl_values_at(f: PLFunction, points: Iterable[Fraction]) -> List[Fraction]:
    return [f.evaluate(p) for p in points]


def _combine(f: PLFunction, g: PLFunction, op: Callable[[Fraction, Fraction], Fraction]) -> PLFunction:
    _same_domain(f, g)
    points = _merged_points(f, g)
    return make_pl(f.domain, points, [op(f.evaluate(p), g.evaluate(p)) for p in points])


def pl_add(f: PLFunction, g: PLFunction) -> PLFunction:
    return _combine(f, g, lambda a, b: a + b)


def pl_scale(f: PLFunction, c) -> PLFunction:
    c = Fraction(c)
    return PLFunction(f.domain, f.breakpoints, tuple(c * v for v in f.values))


def pl_equal(f: PLFunction, g: PLFunction) -> bool:
    if f.domain != g.domain:
        return False
    return all(f.evaluate(p) == g.evaluate(p) for p in _merged_points(f, g))


def pl_multiply(f: PLFunction, g: PLFunction) -> PLFunction:
    """
    Pointwise product, defined when on every segment one factor is constant.

    Raises:
        DomainMismatch: If the domains differ
        NotPiecewiseLinear: If some segment would carry a quadratic piece
    """
    _same_domain(f, g)
    points = _merged_points(f, g)
    fv = [f.evaluate(p) for p in points]
    gv = [g.evaluate(p) for p in points]
    for i in range(len(points) - 1):
        a, b = points[i], points[i + 1]
        if not f.domain.contains((a + b) / 2):
            continue
        if fv[i] != fv[i + 1] and gv[i] != gv[i + 1]:
            raise NotPiecewiseLinear(
                "Product is quadratic on a segment",
                {"segment": [format_rational(a), format_rational(b)]},
            )
    return make_pl(f.domain, points, [x * y for x, y in zip(fv, gv)])


def tent(domain: IntervalSet, peak, support: Interval, height=1) -> PLFunction:
    """
    Tent function: 0 outside ``support``, ``height`` at ``peak``, linear between.

    A one-sided tent (peak at a support end) is allowed only where that end
    is also an end of the domain component, so the result stays continuous.
    """
    peak, height = Fraction(peak), Fraction(height)
    lo, hi = support.lo, support.hi
    if not lo <= peak <= hi:
        raise InstanceFormatError("Peak must lie in the support", {"peak": format_rational(peak), "support": str(support)})
    component = domain.component_of(lo)
    if component is None or not component.contains(hi):
        raise InstanceFormatError("Tent support must lie in one domain component", {"support": str(support)})
    if (peak == lo and lo != component.lo and height != 0) or (peak == hi and hi != component.hi and height != 0):
        raise NotPiecewiseLinear("One-sided tent would be discontinuous", {"support": str(support)})

    def value(x: Fraction) -> Fraction:
        if x < lo or x > hi:
            return Fraction(0)
        if x == peak:
            return height
        if x < peak:
            return height * (x - lo) / (peak - lo)
        return height * (hi - x) / (hi - peak)

    return from_callable(domain, [lo, peak, hi], value)


def plateau(domain: IntervalSet, one_region: IntervalSet, zero_region: IntervalSet) -> PLFunction:
    """
    Urysohn-style function equal to 1 on ``one_region`` and 0 on ``zero_region``.

    Between the regions the function is linear; outside both it continues
    the nearest region's value within each domain component.

    Raises:
        RegionsOverlap: If the regions meet
        GapEmpty: If their closures meet
    """
    if not one_region.is_disjoint(zero_region):
        raise RegionsOverlap("Plateau regions overlap", {"point": format_rational(one_region.intersection(zero_region).sample_point())})
    ones = one_region.closure().intersection(domain)
    zeros = zero_region.closure().intersection(domain)
    if not ones.is_disjoint(zeros):
        raise GapEmpty("Plateau regions have no gap between them", {"point": format_rational(ones.intersection(zeros).sample_point())})

    points = sorted(set(domain.endpoints()) | set(ones.endpoints()) | set(zeros.endpoints()))
    labels: List[Optional[Fraction]] = []
    for p in points:
        if ones.contains(p):
            labels.append(Fraction(1))
        elif zeros.contains(p):
            labels.append(Fraction(0))
        else:
            labels.append(None)

    values: List[Fraction] = []
    for i, p in enumerate(points):
        if labels[i] is not None:
            values.append(labels[i])
            continue
        component = domain.component_of(p)
        inside = [j for j, q in enumerate(points) if component.contains(q) and labels[j] is not None]
        if not inside:
            values.append(Fraction(0))
        else:
            nearest = min(inside, key=lambda j: (abs(points[j] - p), points[j]))
            values.append(labels[nearest])
    return make_pl(domain, points, values)


@dataclass(frozen=True)
class MilgramResult:
    """Outcome of the disjoint-support witness search."""

    witness: Optional[PLFunction]
    common_point: Optional[Fraction]

    @property
    def found(self) -> bool:
        return self.witness is not None


def milgram_witness(f: PLFunction, g: PLFunction) -> MilgramResult:
    """
    Find ``h`` with ``h·f = f`` and ``h·g = 0``.

    Such an ``h`` exists exactly when the supports are disjoint. Otherwise
    a common point is returned, preferring a breakpoint where both functions
    are nonzero.

    Raises:
        DomainMismatch: If the domains differ
    """
    _same_domain(f, g)
    supp_f, supp_g = pl_support(f), pl_support(g)
    common = supp_f.intersection(supp_g)
    if not common.is_empty():
        both_nonzero = nonzero_set(f).intersection(nonzero_set(g))
        candidates = [b for b in _merged_points(f, g) if both_nonzero.contains(b)]
        point = candidates[0] if candidates else (both_nonzero.sample_point() if not both_nonzero.is_empty() else common.sample_point())
        return MilgramResult(None, point)

    h = plateau(f.domain, supp_f, supp_g)
    if not pl_equal(pl_multiply(h, f), f):
        raise TheoremViolation("Plateau does not fix f", {"f": f.to_dict()})
    if not pl_equal(pl_multiply(h, g), zero_function(g.domain)):
        raise TheoremViolation("Plateau does not annihilate g", {"g": g.to_dict()})
    return MilgramResult(h, None)


def pl_sup_norm(f: PLFunction) -> Fraction:
    return max((abs(v) for v in f.values), default=Fraction(0))


@dataclass(frozen=True)
class StepDensity:
    """Piecewise-constant weight: ``weights[i]`` on ``[breaks[i], breaks[i+1]]``."""

    breaks: Tuple[Fraction, ...]
    weights: Tuple[Fraction, ...]

    def weight_at(self, x: Fraction) -> Fraction:
        for i in range(len(self.weights)):
            if self.breaks[i] <= x <= self.breaks[i + 1]:
                return self.weights[i]
        raise DensityNotPositive("Density undefined at point", {"point": format_rational(x)})


def make_density(breaks: Sequence, weights: Sequence) -> StepDensity:
    bks = tuple(Fraction(b) for b in breaks)
    wts = tuple(Fraction(w) for w in weights)
    if len(bks) != len(wts) + 1 or any(bks[i] >= bks[i + 1] for i in range(len(bks) - 1)):
        raise InstanceFormatError("Density needs strictly increasing breaks, one more than weights")
    bad = [format_rational(w) for w in wts if w <= 0]
    if bad:
        raise DensityNotPositive("Density weights must be positive", {"weights": bad})
    return StepDensity(bks, wts)


def uniform_density(domain: IntervalSet, weight=1) -> StepDensity:
    ends = domain.endpoints()
    return make_density([ends[0], ends[-1]], [weight])


def pl_l1_norm(f: PLFunction, density: StepDensity) -> Fraction:
    """
    Exact integral of ``|f|·density`` over the domain.

    Raises:
        DensityNotPositive: If the density does not cover the domain
    """
    ends = f.domain.endpoints()
    if density.breaks[0] > ends[0] or density.breaks[-1] < ends[-1]:
        raise DensityNotPositive("Density does not cover the domain", {"domain": f.domain.to_list()})
    points = set(f.breakpoints)
    points.update(b for b in density.breaks if f.domain.contains(b))
    for a, va, b, vb in f.segments():
        if va * vb < 0:
            points.add(a + va * (b - a) / (va - vb))
    ordered = sorted(points)
    total = Fraction(0)
    for a, b in zip(ordered, ordered[1:]):
        middle = (a + b) / 2
        if not f.domain.contains(middle):
            continue
        total += (abs(f.evaluate(a)) + abs(f.evaluate(b))) / 2 * (b - a) * density.weight_at(middle)
    return total


def random_tent(rng: random.Random, domain: IntervalSet, denominator: int = 8) -> PLFunction:
    """Random tent on a dyadic-style grid of the first domain component."""
    component = domain.intervals[0]
    grid = [component.lo + (component.hi - component.lo) * Fraction(k, denominator) for k in range(denominator + 1)]
    lo, hi = sorted(rng.sample(grid, 2))
    peak = rng.choice([lo + (hi - lo) / 2] + [p for p in grid if lo < p < hi])
    height = rng.choice([-3, -2, -1, 1, 2, 3])
    return tent(domain, peak, closed(lo, hi), height)
