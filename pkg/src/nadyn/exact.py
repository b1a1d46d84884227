"""Exact scalars: rationals and the formal extension Q + Q*alpha.

Rationals are :class:`fractions.Fraction` values (aliased as ``Rat``).
``QAlpha`` holds ``a + b*alpha`` for a single fixed, formal irrational
``alpha`` in (0, 1). Only additive operations and scaling by rationals are
defined, which is all rotation dynamics ever needs.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParseError

Rat = Fraction
RatLike = Union[Fraction, int, str]

_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def rat(value: RatLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: they would smuggle rounding into exact code.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rat(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ParseError(f"not a rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rat(x: Fraction) -> str:
    # Fraction.__str__ already yields "p/q", or "p" when q == 1
    return str(x)


def rat_arith(x: RatLike, y: RatLike, op: str) -> Fraction:
    """Exact ``x op y`` for op in add/sub/mul/div.

    Raises ZeroDivisionError for division by zero.
    """
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    return fn(rat(x), rat(y))


@dataclass(frozen=True)
class QAlpha:
    """The formal number ``a + b*alpha``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", rat(self.a))
        object.__setattr__(self, "b", rat(self.b))

    @classmethod
    def coerce(cls, value) -> QAlpha:
        if isinstance(value, QAlpha):
            return value
        if isinstance(value, str):
            return parse_qalpha(value)
        return cls(rat(value), Fraction(0))

    def __add__(self, other):
        other = QAlpha.coerce(other)
        return QAlpha(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = QAlpha.coerce(other)
        return QAlpha(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return QAlpha.coerce(other) - self

    def __neg__(self):
        return QAlpha(-self.a, -self.b)

    def __mul__(self, k):
        if isinstance(k, QAlpha):
            raise TypeError("QAlpha * QAlpha is not defined (alpha**2 is not in the module)")
        k = rat(k)
        return QAlpha(self.a * k, self.b * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, QAlpha):
            raise TypeError("QAlpha / QAlpha is not defined")
        k = rat(k)
        return QAlpha(self.a / k, self.b / k)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def mod1_is_zero(self) -> bool:
        return qalpha_mod1_is_zero(self)

    def reduce_mod1(self) -> QAlpha:
        """Canonical representative: subtract floor(a), leave b symbolic."""
        return QAlpha(self.a - math.floor(self.a), self.b)

    def __str__(self):
        return format_qalpha(self)


def qalpha_mod1_is_zero(x: QAlpha) -> bool:
    """True iff ``a + b*alpha`` is an integer; alpha irrational forces b == 0."""
    return x.b == 0 and x.a.denominator == 1


def format_qalpha(x: QAlpha) -> str:
    return f"{x.a} + {x.b} a"


_QA_RE = re.compile(r"^\s*([+-]?\d+(?:\s*/\s*\d+)?)\s*\+\s*([+-]?\d+(?:\s*/\s*\d+)?)\s*a\s*$")


def parse_qalpha(text: str) -> QAlpha:
    """Parse ``"p/q + r/s a"``; a bare rational is accepted with b = 0."""
    m = _QA_RE.match(text)
    if m:
        return QAlpha(parse_rat(m.group(1)), parse_rat(m.group(2)))
    try:
        return QAlpha(parse_rat(text), Fraction(0))
    except ParseError:
        raise ParseError(f"not an a + b*alpha value: {text!r}") from None
