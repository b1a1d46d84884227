"""Continuous piecewise-linear self-maps of [0, 1] with rational breakpoints.

A map is stored as its graph nodes: breakpoints ``xs`` (0 = x_0 < ... < x_k = 1)
and values ``ys``. Between nodes the map interpolates linearly, so
continuity holds by construction. Collinear interior nodes are removed,
which makes the representation canonical: two maps are equal as functions
iff their node lists are equal.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import OutOfDomain, ValidationError
from .exact import format_rat, rat
from .intervals import ONE, ZERO, Interval, IntervalSet

__all__ = [
    "PLMap",
    "IntervalSet",
    "evaluate",
    "compose",
    "image",
    "preimage",
    "lap_count",
    "solve_fixed_points",
]


def _canonical(xs: list, ys: list) -> tuple[tuple, tuple]:
    """Drop interior nodes lying on the segment through their neighbours."""
    if len(xs) <= 2:
        return tuple(xs), tuple(ys)
    kx, ky = [xs[0]], [ys[0]]
    for i in range(1, len(xs) - 1):
        x0, y0 = kx[-1], ky[-1]
        x1, y1 = xs[i], ys[i]
        x2, y2 = xs[i + 1], ys[i + 1]
        if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
            kx.append(x1)
            ky.append(y1)
    kx.append(xs[-1])
    ky.append(ys[-1])
    return tuple(kx), tuple(ky)


class PLMap:
    __slots__ = ("xs", "ys", "_slopes", "_hash")

    def __init__(self, xs: Sequence, ys: Sequence, *, _trusted: bool = False):
        if _trusted:
            self.xs, self.ys = _canonical(list(xs), list(ys))
        else:
            xs = [rat(x) for x in xs]
            ys = [rat(y) for y in ys]
            if len(xs) != len(ys) or len(xs) < 2:
                raise ValidationError("shape", "need at least two (x, y) nodes")
            if xs[0] != 0 or xs[-1] != 1:
                raise ValidationError("domain", "breakpoints must start at 0 and end at 1")
            if any(a >= b for a, b in zip(xs, xs[1:])):
                raise ValidationError("order", "breakpoints must be strictly increasing")
            bad = [y for y in ys if y < 0 or y > 1]
            if bad:
                raise ValidationError("range", f"value {format_rat(bad[0])} outside [0, 1]")
            self.xs, self.ys = _canonical(xs, ys)
        self._slopes = None
        self._hash = None

    # constructors ---------------------------------------------------------

    @classmethod
    def from_points(cls, points: Iterable) -> PLMap:
        """From ``[(x, f(x)), ...]`` graph nodes (the serialized form)."""
        pts = list(points)
        return cls([p[0] for p in pts], [p[1] for p in pts])

    @classmethod
    def from_pieces(cls, breakpoints: Sequence, pieces: Sequence) -> PLMap:
        """From breakpoints and one ``(slope, intercept)`` per subinterval.

        Raises ValidationError("continuity") when adjacent pieces disagree.
        """
        bps = [rat(b) for b in breakpoints]
        if len(pieces) != len(bps) - 1:
            raise ValidationError("shape", "need one piece per subinterval")
        ys = []
        for i, (s, c) in enumerate(pieces):
            s, c = rat(s), rat(c)
            left = s * bps[i] + c
            if i and left != ys[-1]:
                raise ValidationError(
                    "continuity", f"pieces disagree at x = {format_rat(bps[i])}"
                )
            if not i:
                ys.append(left)
            ys.append(s * bps[i + 1] + c)
        return cls(bps, ys)

    @classmethod
    def identity(cls) -> PLMap:
        return cls((ZERO, ONE), (ZERO, ONE), _trusted=True)

    @classmethod
    def constant(cls, c) -> PLMap:
        c = rat(c)
        return cls((ZERO, ONE), (c, c))

    @classmethod
    def tent(cls) -> PLMap:
        return cls((ZERO, Fraction(1, 2), ONE), (ZERO, ONE, ZERO), _trusted=True)

    # protocol -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PLMap):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.xs, self.ys))
        return self._hash

    def __repr__(self):
        nodes = ", ".join(f"({format_rat(x)}, {format_rat(y)})" for x, y in zip(self.xs, self.ys))
        return f"PLMap([{nodes}])"

    def __call__(self, x):
        return evaluate(self, x)

    def to_points(self) -> list[tuple[str, str]]:
        return [(format_rat(x), format_rat(y)) for x, y in zip(self.xs, self.ys)]

    @property
    def n_pieces(self) -> int:
        return len(self.xs) - 1

    @property
    def breakpoints(self) -> tuple:
        return self.xs

    @property
    def slopes(self) -> tuple:
        if self._slopes is None:
            xs, ys = self.xs, self.ys
            self._slopes = tuple(
                (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)
            )
        return self._slopes

    @property
    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """``(slope, intercept)`` for each subinterval."""
        return [(s, self.ys[i] - s * self.xs[i]) for i, s in enumerate(self.slopes)]

    def is_identity(self) -> bool:
        return self.xs == (ZERO, ONE) and self.ys == (ZERO, ONE)

    def after(self, f: PLMap) -> PLMap:
        """``self o f``."""
        return compose(self, f)

    def range(self) -> IntervalSet:
        return IntervalSet.closed(min(self.ys), max(self.ys))

    def is_surjective(self) -> bool:
        return min(self.ys) == 0 and max(self.ys) == 1

    def is_identity_on(self, A: IntervalSet) -> bool:
        """Exact check that the map fixes every point of A."""
        for c in A.closure():
            if c.lo == c.hi:
                if evaluate(self, c.lo) != c.lo:
                    return False
                continue
            i = max(bisect_right(self.xs, c.lo) - 1, 0)
            while i < len(self.xs) - 1 and self.xs[i] < c.hi:
                if self.xs[i + 1] > c.lo:
                    s = self.slopes[i]
                    if s != 1 or self.ys[i] != self.xs[i]:
                        return False
                i += 1
        return True


def evaluate(f: PLMap, x) -> Fraction:
    x = rat(x)
    if x < 0 or x > 1:
        raise OutOfDomain(f"{format_rat(x)} is outside [0, 1]")
    xs, ys = f.xs, f.ys
    i = bisect_left(xs, x)
    if xs[i] == x:
        return ys[i]
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def compose(g: PLMap, f: PLMap) -> PLMap:
    """The exact PL map ``g o f``.

    Nodes of the result are the nodes of f plus every point where f crosses
    a breakpoint of g.
    """
    gx, gy = g.xs, g.ys
    fx, fy = f.xs, f.ys
    out_x = [fx[0]]
    out_y = [evaluate(g, fy[0])]
    for i in range(len(fx) - 1):
        x0, x1, y0, y1 = fx[i], fx[i + 1], fy[i], fy[i + 1]
        if y0 != y1:
            lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
            j0 = bisect_right(gx, lo)
            j1 = bisect_left(gx, hi)
            idx = range(j0, j1) if y0 < y1 else range(j1 - 1, j0 - 1, -1)
            dx_dy = (x1 - x0) / (y1 - y0)
            for j in idx:
                out_x.append(x0 + (gx[j] - y0) * dx_dy)
                out_y.append(gy[j])
        out_x.append(x1)
        out_y.append(evaluate(g, y1))
    return PLMap(out_x, out_y, _trusted=True)


def _clip(c: Interval, a, b):
    """c intersected with the closed interval [a, b], or None if empty."""
    if c.lo > a:
        lo, lo_open = c.lo, c.lo_open
    elif c.lo == a:
        lo, lo_open = a, c.lo_open
    else:
        lo, lo_open = a, False
    if c.hi < b:
        hi, hi_open = c.hi, c.hi_open
    elif c.hi == b:
        hi, hi_open = b, c.hi_open
    else:
        hi, hi_open = b, False
    sub = Interval(lo, hi, lo_open, hi_open)
    return None if sub.is_empty() else sub


def _piece_domains(f: PLMap, c: Interval):
    """Yield ``(i, sub)`` where sub = c intersected with piece i's closed domain."""
    xs = f.xs
    i = max(bisect_right(xs, c.lo) - 1, 0)
    last = len(xs) - 2
    while i <= last and xs[i] <= c.hi:
        sub = _clip(c, xs[i], xs[i + 1])
        if sub is not None:
            yield i, sub
        i += 1


def image(f: PLMap, A: IntervalSet) -> IntervalSet:
    """Exact image f(A).

    On each affine piece an interval maps to an interval; openness follows
    the piece's direction. A fold point inside A is a closed endpoint of the
    sub-interval on both sides, so the extremum it produces is attained.
    """
    out = []
    xs, ys, slopes = f.xs, f.ys, f.slopes
    for c in A:
        for i, sub in _piece_domains(f, c):
            s = slopes[i]
            y_lo = ys[i] + s * (sub.lo - xs[i])
            y_hi = ys[i] + s * (sub.hi - xs[i])
            if s > 0:
                out.append(Interval(y_lo, y_hi, sub.lo_open, sub.hi_open))
            elif s < 0:
                out.append(Interval(y_hi, y_lo, sub.hi_open, sub.lo_open))
            else:
                out.append(Interval(y_lo, y_lo))
    return IntervalSet(out) if out else IntervalSet.empty()


def preimage(f: PLMap, A: IntervalSet) -> IntervalSet:
    """Exact preimage of A under f as a finite union of intervals."""
    out = []
    comps = A.components
    if not comps:
        return IntervalSet.empty()
    his = [c.hi for c in comps]
    xs, ys, slopes = f.xs, f.ys, f.slopes
    for i, s in enumerate(slopes):
        a, b = xs[i], xs[i + 1]
        ya, yb = ys[i], ys[i + 1]
        if s == 0:
            if ya in A:
                out.append(Interval(a, b))
            continue
        lo_y, hi_y = (ya, yb) if ya < yb else (yb, ya)
        j = bisect_left(his, lo_y)
        while j < len(comps) and comps[j].lo <= hi_y:
            c = comps[j]
            j += 1
            # x-range solving f(x) in c, before clipping to [a, b]
            x_lo = a + (c.lo - ya) / s
            x_hi = a + (c.hi - ya) / s
            if s > 0:
                piece = Interval(x_lo, x_hi, c.lo_open, c.hi_open)
            else:
                piece = Interval(x_hi, x_lo, c.hi_open, c.lo_open)
            sub = _clip(piece, a, b)
            if sub is not None:
                out.append(sub)
    return IntervalSet(out) if out else IntervalSet.empty()


def lap_count(f: PLMap) -> int:
    """Number of maximal monotone pieces; a flat piece is a lap of its own."""
    laps = 0
    prev = None
    for s in f.slopes:
        sign = (s > 0) - (s < 0)
        if sign == 0 or sign != prev:
            laps += 1
        prev = sign
    return laps


FixedSet = Union[Fraction, IntervalSet]


def solve_fixed_points(f: PLMap) -> list[FixedSet]:
    """Exact solutions of f(x) = x, sorted left to right.

    Isolated solutions come back as Fractions; runs of the identity come
    back as closed IntervalSets.
    """
    xs, ys, slopes = f.xs, f.ys, f.slopes
    runs: list[list] = []  # [lo, hi] closed pieces of identity
    points: list[Fraction] = []
    for i, s in enumerate(slopes):
        a, b = xs[i], xs[i + 1]
        c = ys[i] - s * a
        if s == 1:
            if c == 0:
                if runs and runs[-1][1] == a:
                    runs[-1][1] = b
                else:
                    runs.append([a, b])
            continue
        x = c / (1 - s)
        if a <= x <= b:
            points.append(x)
    result: list[FixedSet] = [IntervalSet.closed(lo, hi) for lo, hi in runs]
    seen = set()
    for x in points:
        if x in seen or any(lo <= x <= hi for lo, hi in runs):
            continue
        seen.add(x)
        result.append(x)

    def key(item):
        return item.lo if isinstance(item, IntervalSet) else item

    result.sort(key=key)
    return result


def fixed_point_set(f: PLMap) -> IntervalSet:
    """All fixed points as a single closed IntervalSet."""
    parts = []
    for item in solve_fixed_points(f):
        parts.append(item if isinstance(item, IntervalSet) else IntervalSet.point(item))
    return IntervalSet.union_all(parts)


def iterate(f: PLMap, k: int) -> PLMap:
    """``f`` composed with itself k times (k >= 0)."""
    out = PLMap.identity()
    for _ in range(k):
        out = compose(f, out)
    return out
