"""Circle, two-sided full shift and cylinder I x S^1, plus the Hausdorff metric.

Angles are measured in turns (one full circle = 1), so a rotation by
2*pi*theta is stored as ``theta``. Shift-space points are periodic
bi-infinite sequences; open sets there are finite-support cylinders.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import ParseError, SpaceMismatch, UnsupportedSpace
from .exact import QAlpha, format_rat, parse_qalpha, parse_rat, rat
from .intervals import ZERO, IntervalSet

LEFT, RIGHT = "left", "right"


# circle -----------------------------------------------------------------


@dataclass(frozen=True)
class CirclePoint:
    angle: QAlpha

    def __post_init__(self):
        object.__setattr__(self, "angle", QAlpha.coerce(self.angle).reduce_mod1())

    def __str__(self):
        return str(self.angle)


@dataclass(frozen=True)
class RotationMap:
    """Rotation by ``delta`` turns."""

    delta: QAlpha = field(default_factory=QAlpha)

    def __post_init__(self):
        object.__setattr__(self, "delta", QAlpha.coerce(self.delta))

    def __call__(self, p: CirclePoint) -> CirclePoint:
        return rotate(self, p)

    def after(self, other: RotationMap) -> RotationMap:
        return RotationMap(self.delta + other.delta)

    def is_identity(self) -> bool:
        return self.delta.mod1_is_zero()

    @classmethod
    def identity(cls) -> RotationMap:
        return cls(QAlpha())

    def period(self) -> Optional[int]:
        """Least p >= 1 with p*delta an integer, or None for irrational delta.

        When it exists every circle point has exactly this period.
        """
        if not self.delta.is_rational:
            return None
        return self.delta.a.denominator


def rotate(m: RotationMap, p: CirclePoint) -> CirclePoint:
    return CirclePoint(p.angle + m.delta)


def arc_distance(p: CirclePoint, q: CirclePoint) -> Fraction:
    d = p.angle - q.angle
    if not d.is_rational:
        raise UnsupportedSpace("arc distance between points differing by an irrational angle")
    t = d.a - math.floor(d.a)
    return min(t, 1 - t)


# two-sided shift --------------------------------------------------------


def _primitive_root(word: str) -> str:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


@dataclass(frozen=True)
class ShiftPoint:
    """The periodic sequence x_i = word[(i + offset) mod len(word)].

    The word is reduced to its primitive root and then to its least
    rotation, so equal sequences compare equal.
    """

    word: str
    offset: int = 0

    def __post_init__(self):
        if not self.word or set(self.word) - {"0", "1"}:
            raise ValueError(f"shift word must be a nonempty binary string, got {self.word!r}")
        root = _primitive_root(self.word)
        r = min(range(len(root)), key=lambda j: root[j:] + root[:j])
        object.__setattr__(self, "word", root[r:] + root[:r])
        object.__setattr__(self, "offset", (self.offset - r) % len(root))

    def symbol(self, i: int) -> str:
        return self.word[(i + self.offset) % len(self.word)]

    def __str__(self):
        return f"{self.word}@{self.offset}"


def parse_shift_point(text: str) -> ShiftPoint:
    m = re.fullmatch(r"\s*([01]+)\s*@\s*(-?\d+)\s*", text)
    if not m:
        raise ParseError(f"not a shift point 'word@offset': {text!r}")
    return ShiftPoint(m.group(1), int(m.group(2)))


@dataclass(frozen=True)
class ShiftMap:
    """sigma^steps; steps = +1 is the left shift, -1 the right shift."""

    steps: int = 0

    def __call__(self, p: ShiftPoint) -> ShiftPoint:
        return ShiftPoint(p.word, p.offset + self.steps)

    def after(self, other: ShiftMap) -> ShiftMap:
        return ShiftMap(self.steps + other.steps)

    def is_identity(self) -> bool:
        return self.steps == 0

    @classmethod
    def identity(cls) -> ShiftMap:
        return cls(0)

    @classmethod
    def of(cls, direction: str) -> ShiftMap:
        return cls(_direction_steps(direction))


def _direction_steps(direction: str) -> int:
    if direction == LEFT:
        return 1
    if direction == RIGHT:
        return -1
    raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")


def shift(direction: str, p: ShiftPoint) -> ShiftPoint:
    return ShiftMap.of(direction)(p)


def shift_distance(p: ShiftPoint, q: ShiftPoint) -> Fraction:
    """d(x, y) = 2**-k with k the smallest |i| where x_i != y_i."""
    if p == q:
        return ZERO
    period = math.lcm(len(p.word), len(q.word))
    for k in range(period + 1):
        if p.symbol(k) != q.symbol(k) or p.symbol(-k) != q.symbol(-k):
            return Fraction(1, 2**k)
    raise AssertionError("distinct periodic points agree on a full period")


@dataclass(frozen=True)
class Cylinder:
    """Open set {x : x_i = s for each (i, s) in constraints}."""

    constraints: tuple = ()

    def __post_init__(self):
        items = self.constraints
        if isinstance(items, Mapping):
            items = items.items()
        items = tuple(sorted((int(i), str(s)) for i, s in items))
        if any(s not in ("0", "1") for _, s in items):
            raise ValueError("cylinder symbols must be '0' or '1'")
        if len({i for i, _ in items}) != len(items):
            raise ValueError("cylinder constrains a position twice")
        object.__setattr__(self, "constraints", items)

    def as_dict(self) -> dict:
        return dict(self.constraints)

    def __contains__(self, p: ShiftPoint) -> bool:
        return all(p.symbol(i) == s for i, s in self.constraints)

    def __str__(self):
        return ",".join(f"{i}:{s}" for i, s in self.constraints)


def parse_cylinder(text: str) -> Cylinder:
    items = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        m = re.fullmatch(r"(-?\d+)\s*:\s*([01])", chunk)
        if not m:
            raise ParseError(f"bad cylinder constraint {chunk!r}")
        items.append((int(m.group(1)), m.group(2)))
    return Cylinder(tuple(items))


def cylinder_shift(direction: Union[str, int], C: Cylinder) -> Cylinder:
    """Image of C under a shift; the left shift moves position i to i - 1."""
    steps = direction if isinstance(direction, int) else _direction_steps(direction)
    return Cylinder(tuple((i - steps, s) for i, s in C.constraints))


def cylinder_intersect(C1: Cylinder, C2: Cylinder) -> Optional[Cylinder]:
    """Intersection of two cylinders, or None when the constraints conflict."""
    merged = dict(C1.constraints)
    for i, s in C2.constraints:
        if merged.get(i, s) != s:
            return None
        merged[i] = s
    return Cylinder(tuple(merged.items()))


def shift_mesh(m: int) -> list[Cylinder]:
    """Cylinders fixing positions 0..L-1, with 2**L the largest power of two <= m."""
    length = max(1, m.bit_length() - 1)
    cells = []
    for code in range(2**length):
        bits = format(code, f"0{length}b")
        cells.append(Cylinder(tuple(enumerate(bits))))
    return cells


# cylinder I x S^1 -------------------------------------------------------


@dataclass(frozen=True)
class CylPoint:
    r: Fraction
    theta: QAlpha

    def __post_init__(self):
        r = rat(self.r)
        if r < 0 or r > 1:
            raise ValueError("cylinder height must lie in [0, 1]")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", QAlpha.coerce(self.theta).reduce_mod1())

    def __str__(self):
        return f"{format_rat(self.r)}; {self.theta}"


def parse_cyl_point(text: str) -> CylPoint:
    try:
        r, theta = text.split(";")
    except ValueError:
        raise ParseError(f"cylinder point must read 'r; theta', got {text!r}") from None
    return CylPoint(parse_rat(r), parse_qalpha(theta))


@dataclass(frozen=True)
class TwistMap:
    """(r, theta) -> (r, theta + rate*r); the generators have rate +1 and -1."""

    rate: int = 1

    def __call__(self, p: CylPoint) -> CylPoint:
        return twist(self, p)

    def after(self, other: TwistMap) -> TwistMap:
        return TwistMap(self.rate + other.rate)

    def is_identity(self) -> bool:
        return self.rate == 0

    @classmethod
    def identity(cls) -> TwistMap:
        return cls(0)

    def cell_image_diameter(self, m: int) -> Fraction:
        """Diameter of the image of any [i/m, (i+1)/m] x [j/m, (j+1)/m] cell.

        The angular spread of the image is (1 + |rate|)/m; an arc's diameter is
        capped at half a turn. The metric is max(|dr|, arc distance).
        """
        spread = Fraction(1 + abs(self.rate), m)
        return max(Fraction(1, m), min(spread, Fraction(1, 2)))


def twist(m: TwistMap, p: CylPoint) -> CylPoint:
    return CylPoint(p.r, p.theta + m.rate * p.r)


def cyl_distance(p: CylPoint, q: CylPoint) -> Fraction:
    return max(abs(p.r - q.r), arc_distance(CirclePoint(p.theta), CirclePoint(q.theta)))


# Hausdorff metric -------------------------------------------------------


@dataclass(frozen=True)
class PointSet:
    """A finite nonempty set of points of one space."""

    points: tuple

    def __post_init__(self):
        pts = tuple(dict.fromkeys(self.points))
        if not pts:
            raise ValueError("Hausdorff sets must be nonempty")
        kinds = {type(p) for p in pts}
        if len(kinds) != 1:
            raise SpaceMismatch("points from different spaces in one set")
        object.__setattr__(self, "points", pts)

    @property
    def space(self) -> str:
        return _space_of_point(self.points[0])


HMetricSet = Union[IntervalSet, PointSet]


def _space_of_point(p) -> str:
    if isinstance(p, Fraction):
        return "interval"
    if isinstance(p, CirclePoint):
        return "circle"
    if isinstance(p, ShiftPoint):
        return "shift"
    if isinstance(p, CylPoint):
        return "cylinder"
    raise SpaceMismatch(f"unknown point type {type(p).__name__}")


_METRICS = {
    "interval": lambda x, y: abs(x - y),
    "circle": arc_distance,
    "shift": shift_distance,
    "cylinder": cyl_distance,
}


def _as_closed(A) -> IntervalSet:
    return A.closure()


def _dist_to_closed(x: Fraction, B: IntervalSet) -> Fraction:
    best = None
    for c in B:
        if c.lo <= x <= c.hi:
            return ZERO
        d = c.lo - x if x < c.lo else x - c.hi
        if best is None or d < best:
            best = d
    return best


def _directed_interval(A: IntervalSet, B: IntervalSet) -> Fraction:
    """sup over a in A of dist(a, B), both closed and nonempty.

    The distance to B is piecewise linear with peaks at gap midpoints, so the
    sup is reached at an endpoint of A or at a gap midpoint lying in A.
    """
    candidates = A.endpoints()
    comps = B.components
    for left, right in zip(comps, comps[1:]):
        mid = (left.hi + right.lo) / 2
        if mid in A:
            candidates.append(mid)
    return max(_dist_to_closed(x, B) for x in candidates)


def _as_pointset(A) -> PointSet:
    if isinstance(A, PointSet):
        return A
    if isinstance(A, (list, tuple, set, frozenset)):
        return PointSet(tuple(A))
    return A


def hausdorff_distance(A: HMetricSet, B: HMetricSet) -> Fraction:
    """Exact two-sided Hausdorff distance.

    IntervalSets are compared through their closures; finite point sets use
    the metric of their space (arc length on the circle, 2**-k on the shift,
    max metric on the cylinder).
    """
    A, B = _as_pointset(A), _as_pointset(B)
    if isinstance(A, PointSet) and isinstance(B, PointSet):
        if A.space != B.space:
            raise SpaceMismatch(f"{A.space} set vs {B.space} set")
        d = _METRICS[A.space]
        return max(
            max(min(d(a, b) for b in B.points) for a in A.points),
            max(min(d(a, b) for a in A.points) for b in B.points),
        )
    if isinstance(A, PointSet):
        if A.space != "interval":
            raise SpaceMismatch(f"{A.space} points vs interval set")
        A = IntervalSet.union_all(IntervalSet.point(x) for x in A.points)
    if isinstance(B, PointSet):
        if B.space != "interval":
            raise SpaceMismatch(f"interval set vs {B.space} points")
        B = IntervalSet.union_all(IntervalSet.point(x) for x in B.points)
    if not isinstance(A, IntervalSet) or not isinstance(B, IntervalSet):
        raise SpaceMismatch("unsupported Hausdorff operands")
    if A.is_empty() or B.is_empty():
        raise ValueError("Hausdorff distance needs nonempty sets")
    A, B = _as_closed(A), _as_closed(B)
    return max(_directed_interval(A, B), _directed_interval(B, A))


def distance_to_unit(A: IntervalSet) -> Fraction:
    """d_H(closure(A), [0, 1])."""
    return hausdorff_distance(A, IntervalSet.unit())
