"""Finite unions of rational intervals inside [0, 1].

Each component carries its own endpoint openness. Instances are normalized
on construction: empty pieces dropped, overlapping or touching pieces
merged, components sorted. Two normalized sets are equal iff they contain
the same points.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

from .errors import ParseError
from .exact import format_rat, parse_rat, rat

ZERO = Fraction(0)
ONE = Fraction(1)


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return self.lo_open or self.hi_open
        return False

    def __contains__(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True

    def __str__(self):
        if self.lo == self.hi:
            return "{%s}" % format_rat(self.lo)
        return "%s%s, %s%s" % (
            "(" if self.lo_open else "[",
            format_rat(self.lo),
            format_rat(self.hi),
            ")" if self.hi_open else "]",
        )


def _touches(a: Interval, b: Interval) -> bool:
    # assumes a sorts before b
    return b.lo < a.hi or (b.lo == a.hi and not (a.hi_open and b.lo_open))


def _normalize(parts: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted((p for p in parts if not p.is_empty()), key=lambda p: (p.lo, p.lo_open))
    out: list[Interval] = []
    for p in items:
        if out and _touches(out[-1], p):
            q = out[-1]
            if p.hi > q.hi:
                out[-1] = Interval(q.lo, p.hi, q.lo_open, p.hi_open)
            elif p.hi == q.hi:
                out[-1] = Interval(q.lo, q.hi, q.lo_open, q.hi_open and p.hi_open)
        else:
            out.append(p)
    return tuple(out)


class IntervalSet:
    """Normalized finite union of intervals with endpoints in [0, 1]."""

    __slots__ = ("components", "_hash")

    def __init__(self, components: Iterable = (), *, _trusted: bool = False):
        if _trusted:
            self.components = tuple(components)
        else:
            parts = []
            for c in components:
                c = Interval(rat(c[0]), rat(c[1]), *(bool(v) for v in c[2:]))
                if c.lo < 0 or c.hi > 1:
                    raise ValueError(f"component {c} leaves [0, 1]")
                parts.append(c)
            self.components = _normalize(parts)
        self._hash = None

    # constructors ---------------------------------------------------------

    @classmethod
    def empty(cls) -> IntervalSet:
        return cls((), _trusted=True)

    @classmethod
    def unit(cls) -> IntervalSet:
        return cls((Interval(ZERO, ONE),), _trusted=True)

    @classmethod
    def closed(cls, lo, hi) -> IntervalSet:
        return cls([(lo, hi, False, False)])

    @classmethod
    def open(cls, lo, hi) -> IntervalSet:
        return cls([(lo, hi, True, True)])

    @classmethod
    def point(cls, x) -> IntervalSet:
        return cls([(x, x)])

    @classmethod
    def clipped_open(cls, lo, hi) -> IntervalSet:
        """The open interval (lo, hi) intersected with [0, 1].

        Endpoints outside [0, 1] become closed at 0 or 1, which keeps the
        result relatively open in [0, 1].
        """
        lo, hi = rat(lo), rat(hi)
        lo_open = lo >= 0
        hi_open = hi <= 1
        lo, hi = max(lo, ZERO), min(hi, ONE)
        if lo > hi:
            return cls.empty()
        return cls([(lo, hi, lo_open, hi_open)])

    @classmethod
    def union_all(cls, sets: Iterable[IntervalSet]) -> IntervalSet:
        parts = [c for s in sets for c in s.components]
        return cls(_normalize(parts), _trusted=True)

    # basic protocol -------------------------------------------------------

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __bool__(self):
        return bool(self.components)

    def is_empty(self) -> bool:
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def __repr__(self):
        return f"IntervalSet({str(self)!r})"

    def __str__(self):
        if not self.components:
            return "{}"
        return " U ".join(str(c) for c in self.components)

    def __contains__(self, x) -> bool:
        # components are few; a linear scan beats bisect bookkeeping here
        for c in self.components:
            if x < c.lo:
                return False
            if x in c:
                return True
        return False

    # set algebra ----------------------------------------------------------

    def __or__(self, other: IntervalSet) -> IntervalSet:
        return IntervalSet(_normalize(self.components + other.components), _trusted=True)

    union = __or__

    def __and__(self, other: IntervalSet) -> IntervalSet:
        out = []
        a, b = self.components, other.components
        i = j = 0
        while i < len(a) and j < len(b):
            p, q = a[i], b[j]
            if p.lo > q.lo or (p.lo == q.lo and p.lo_open):
                lo, lo_open = p.lo, p.lo_open
            else:
                lo, lo_open = q.lo, q.lo_open
            if p.hi < q.hi or (p.hi == q.hi and p.hi_open):
                hi, hi_open = p.hi, p.hi_open
            else:
                hi, hi_open = q.hi, q.hi_open
            piece = Interval(lo, hi, lo_open, hi_open)
            if not piece.is_empty():
                out.append(piece)
            # advance whichever ends first
            if p.hi < q.hi or (p.hi == q.hi and p.hi_open and not q.hi_open):
                i += 1
            elif q.hi < p.hi or (p.hi == q.hi and q.hi_open and not p.hi_open):
                j += 1
            else:
                i += 1
                j += 1
        return IntervalSet(out, _trusted=True)

    intersection = __and__

    def complement(self) -> IntervalSet:
        """Complement relative to [0, 1]."""
        out = []
        lo, lo_open = ZERO, False
        for c in self.components:
            out.append(Interval(lo, c.lo, lo_open, not c.lo_open))
            lo, lo_open = c.hi, not c.hi_open
        out.append(Interval(lo, ONE, lo_open, False))
        return IntervalSet(_normalize(out), _trusted=True)

    def __sub__(self, other: IntervalSet) -> IntervalSet:
        return self & other.complement()

    def issubset(self, other: IntervalSet) -> bool:
        return (self & other) == self

    __le__ = issubset

    def intersects(self, other: IntervalSet) -> bool:
        return not (self & other).is_empty()

    # topology and size ----------------------------------------------------

    def closure(self) -> IntervalSet:
        return IntervalSet(
            _normalize(Interval(c.lo, c.hi) for c in self.components), _trusted=True
        )

    def is_closed(self) -> bool:
        return all(not (c.lo_open or c.hi_open) for c in self.components)

    def has_interior(self) -> bool:
        return any(c.lo < c.hi for c in self.components)

    @property
    def lo(self) -> Fraction:
        return self.components[0].lo

    @property
    def hi(self) -> Fraction:
        return self.components[-1].hi

    def diameter(self) -> Fraction:
        if not self.components:
            return ZERO
        return self.hi - self.lo

    def measure(self) -> Fraction:
        return sum((c.hi - c.lo for c in self.components), ZERO)

    def endpoints(self) -> list[Fraction]:
        pts = []
        for c in self.components:
            pts.append(c.lo)
            if c.hi != c.lo:
                pts.append(c.hi)
        return pts

    def sample(self, rng, count: int, max_den: int = 997) -> list[Fraction]:
        """Random rationals in the set (deterministic for a seeded rng)."""
        pts = []
        comps = [c for c in self.components]
        if not comps:
            return pts
        for _ in range(count):
            c = comps[rng.randrange(len(comps))]
            if c.lo == c.hi:
                pts.append(c.lo)
                continue
            t = Fraction(rng.randrange(1, max_den), max_den)
            pts.append(c.lo + t * (c.hi - c.lo))
        return pts

    # serialization --------------------------------------------------------

    def to_text(self) -> str:
        return str(self)


_COMP_RE = re.compile(r"\s*(?:([\[(])\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*([\])])|\{\s*([^}\s]+)\s*\})\s*")


def parse_interval_set(text: str) -> IntervalSet:
    """Inverse of ``str(IntervalSet)``: ``"[0, 1/2) U {3/4}"``."""
    text = text.strip()
    if text in ("{}", ""):
        return IntervalSet.empty()
    parts = []
    for chunk in text.split("U"):
        m = _COMP_RE.fullmatch(chunk)
        if not m:
            raise ParseError(f"bad interval component {chunk.strip()!r}")
        if m.group(5) is not None:
            x = parse_rat(m.group(5))
            parts.append((x, x, False, False))
        else:
            parts.append(
                (parse_rat(m.group(2)), parse_rat(m.group(3)), m.group(1) == "(", m.group(4) == ")")
            )
    return IntervalSet(parts)


def mesh_cells(m: int) -> list[IntervalSet]:
    """The m open cells (j/m, (j+1)/m)."""
    return [IntervalSet.open(Fraction(j, m), Fraction(j + 1, m)) for j in range(m)]
