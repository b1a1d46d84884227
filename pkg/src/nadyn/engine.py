"""Non-autonomous systems: families of maps and their composed state maps.

``omega(F, n)`` is f_n o ... o f_1; ``omega(F, 0)`` is the identity. A finite
family {f_1, ..., f_p} is applied cyclically, f_k = f_{1 + (k-1) mod p}, so
omega(F, p*k) equals g**k for g = f_p o ... o f_1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

from .errors import BudgetExceeded, TransferFailed, UnsupportedComposition
from .exact import QAlpha, rat
from .intervals import IntervalSet
from .plmap import PLMap, compose, evaluate, image, preimage, solve_fixed_points
from .spaces import (
    CirclePoint,
    CylPoint,
    Cylinder,
    RotationMap,
    ShiftMap,
    ShiftPoint,
    TwistMap,
    cylinder_shift,
)

DEFAULT_BUDGET = 10**6

SPACE_OF_MAP = {
    PLMap: "interval",
    RotationMap: "circle",
    ShiftMap: "shift",
    TwistMap: "cylinder",
}

IDENTITY = {
    "interval": PLMap.identity,
    "circle": RotationMap.identity,
    "shift": ShiftMap.identity,
    "cylinder": TwistMap.identity,
}


def space_of(f) -> str:
    try:
        return SPACE_OF_MAP[type(f)]
    except KeyError:
        raise UnsupportedComposition(f"not a supported map: {type(f).__name__}") from None


def compose_maps(g, f):
    """``g o f`` for two maps of the same kind."""
    if type(g) is not type(f):
        raise UnsupportedComposition(
            f"cannot compose {type(g).__name__} with {type(f).__name__}"
        )
    if isinstance(g, PLMap):
        return compose(g, f)
    return g.after(f)


def is_identity_map(f) -> bool:
    return f.is_identity()


# rational enumeration -----------------------------------------------------


class CalkinWilfUnit:
    """0 followed by the Calkin-Wilf sequence restricted to (0, 1].

    Every rational in [0, 1] appears exactly once. Terms are cached, so
    indexing is amortized O(1) after the first visit.
    """

    def __init__(self):
        self._terms = [Fraction(0)]
        self._cw = Fraction(1)
        self._lock = threading.Lock()

    def __call__(self, n: int) -> Fraction:
        if n < 1:
            raise IndexError("enumeration is indexed from 1")
        with self._lock:
            while len(self._terms) < n:
                x = self._cw
                if x <= 1:
                    self._terms.append(x)
                # Newman's successor formula
                self._cw = 1 / (2 * (x.numerator // x.denominator) - x + 1)
        return self._terms[n - 1]


_CALKIN_WILF = CalkinWilfUnit()

RULES: dict[str, Callable[[int], Fraction]] = {"calkin-wilf": _CALKIN_WILF}


# families ---------------------------------------------------------------


@dataclass(eq=False)
class Family:
    """Generator of the sequence (f_n).

    kind is one of ``"cyclic"`` (finite list applied periodically),
    ``"constants"`` (f_n(x) = rule(n)), or ``"rotation_sequence"``
    (f_n rotates by theta / base**n turns).
    """

    kind: str
    space: str
    maps: tuple = ()
    rule: str = ""
    theta: Optional[QAlpha] = None
    base: int = 0
    budget: int = DEFAULT_BUDGET
    _chain: Optional["OmegaChain"] = field(default=None, repr=False)

    # constructors

    @classmethod
    def cyclic(cls, maps: Sequence, budget: int = DEFAULT_BUDGET) -> Family:
        maps = tuple(maps)
        if not maps:
            raise ValueError("a finite family needs at least one map")
        spaces = {space_of(f) for f in maps}
        if len(spaces) != 1:
            raise UnsupportedComposition(f"family mixes spaces {sorted(spaces)}")
        return cls("cyclic", spaces.pop(), maps=maps, budget=budget)

    @classmethod
    def autonomous(cls, f, budget: int = DEFAULT_BUDGET) -> Family:
        return cls.cyclic([f], budget=budget)

    @classmethod
    def constants(cls, rule: str = "calkin-wilf") -> Family:
        if rule not in RULES:
            raise ValueError(f"unknown constant rule {rule!r}")
        return cls("constants", "interval", rule=rule)

    @classmethod
    def rotation_sequence(cls, theta, base: int = 3) -> Family:
        if base < 2:
            raise ValueError("rotation base must be >= 2")
        return cls("rotation_sequence", "circle", theta=QAlpha.coerce(theta), base=int(base))

    # access

    @property
    def is_finite(self) -> bool:
        return self.kind == "cyclic"

    @property
    def period(self) -> Optional[int]:
        return len(self.maps) if self.kind == "cyclic" else None

    def member(self, k: int):
        """f_k for k >= 1."""
        if k < 1:
            raise IndexError("family members are indexed from 1")
        if self.kind == "cyclic":
            return self.maps[(k - 1) % len(self.maps)]
        if self.kind == "constants":
            return PLMap.constant(RULES[self.rule](k))
        return RotationMap(self.theta / Fraction(self.base) ** k)

    def identity(self):
        return IDENTITY[self.space]()

    @property
    def chain(self) -> "OmegaChain":
        if self._chain is None:
            self._chain = OmegaChain(self)
        return self._chain

    def describe(self) -> dict:
        d = {"kind": self.kind, "space": self.space}
        if self.kind == "cyclic":
            d["size"] = len(self.maps)
        elif self.kind == "constants":
            d["rule"] = self.rule
        else:
            d["theta"] = str(self.theta)
            d["base"] = self.base
        return d


class OmegaChain:
    """Lazily grown cache of omega_0 .. omega_N.

    Only cyclic families are cached; the other kinds have closed forms.
    Growth is append-only under a lock (single writer, many readers). The
    total breakpoint count of cached PL maps is capped by ``family.budget``.
    """

    def __init__(self, family: Family):
        self.family = family
        self._maps = [family.identity()]
        self._breakpoints = 2 if family.space == "interval" else 0
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._maps)

    @property
    def breakpoints_used(self) -> int:
        return self._breakpoints

    def __getitem__(self, n: int):
        if n < 0:
            raise IndexError("omega is defined for n >= 0")
        F = self.family
        if F.kind == "rotation_sequence":
            # theta * (b^-1 + ... + b^-n) = theta * (1 - b^-n) / (b - 1)
            b = Fraction(F.base)
            return RotationMap(F.theta * (1 - b ** (-n)) / (b - 1))
        if F.kind == "constants":
            return PLMap.identity() if n == 0 else PLMap.constant(RULES[F.rule](n))
        if n < len(self._maps):
            return self._maps[n]
        with self._lock:
            while len(self._maps) <= n:
                k = len(self._maps)
                nxt = compose_maps(F.member(k), self._maps[-1])
                if isinstance(nxt, PLMap):
                    size = len(nxt.xs)
                    if self._breakpoints + size > F.budget:
                        raise BudgetExceeded(
                            f"omega_{k} needs {size} breakpoints; cache holds "
                            f"{self._breakpoints} of {F.budget}"
                        )
                    self._breakpoints += size
                self._maps.append(nxt)
        return self._maps[n]


def omega(F: Family, n: int):
    """The composed state map f_n o ... o f_1 (identity for n = 0)."""
    return F.chain[n]


def apply_map(f, x):
    if isinstance(f, PLMap):
        return evaluate(f, x)
    return f(x)


def orbit(F: Family, x, N: int) -> list:
    """[omega_1(x), ..., omega_N(x)], computed step by step."""
    if N < 1:
        raise ValueError("orbit horizon must be >= 1")
    if F.kind == "constants":
        return [RULES[F.rule](k) for k in range(1, N + 1)]
    out = []
    for k in range(1, N + 1):
        x = apply_map(F.member(k), x)
        out.append(x)
    return out


def map_image(f, A):
    """Image of an open-set representation under one map."""
    if isinstance(f, PLMap):
        return image(f, A)
    if isinstance(f, ShiftMap):
        return cylinder_shift(f.steps, A)
    raise UnsupportedComposition(f"set images are not supported for {type(f).__name__}")


def forward_images(F: Family, A, N: int, start: int = 0) -> Iterator[tuple[int, object]]:
    """Yield (n, omega_n(A)) for n = start+1 .. N, with A = omega_start(original)."""
    S = A
    for n in range(start + 1, N + 1):
        S = map_image(F.member(n), S)
        yield n, S


def image_at(F: Family, A, n: int):
    S = A
    for _, S in forward_images(F, A, n):
        pass
    return S


def chained_preimage(F: Family, A: IntervalSet, n: int) -> IntervalSet:
    """f_1^-1 o ... o f_n^-1 (A), one member at a time."""
    S = A
    for k in range(n, 0, -1):
        S = preimage(F.member(k), S)
    return S


# reduction to the autonomous composition ----------------------------------


@dataclass
class Reduction:
    g: object
    n: int
    surjective: list
    commutative: bool

    @property
    def all_surjective(self) -> bool:
        return all(self.surjective)


def is_surjective(f) -> bool:
    if isinstance(f, PLMap):
        return image(f, IntervalSet.unit()) == IntervalSet.unit()
    # rotations, shifts and twists are bijections
    return True


def is_commutative(F: Family) -> bool:
    maps = F.maps
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            if compose_maps(maps[i], maps[j]) != compose_maps(maps[j], maps[i]):
                return False
    return True


def reduce_to_autonomous(F: Family) -> Reduction:
    """g = f_n o ... o f_1 together with per-member surjectivity flags."""
    if not F.is_finite:
        raise ValueError("only finite cyclic families reduce to a single map")
    return Reduction(
        g=omega(F, F.period),
        n=F.period,
        surjective=[is_surjective(f) for f in F.maps],
        commutative=is_commutative(F),
    )


def identity_collapse(F: Family) -> Optional[int]:
    """p when F is cyclic of size p and omega_p is the identity, else None.

    Then omega_{n+p} = omega_n for every n, so the whole system only ever
    applies the p maps omega_1, ..., omega_p.
    """
    if not F.is_finite:
        return None
    try:
        g = omega(F, F.period)
    except BudgetExceeded:
        return None
    return F.period if is_identity_map(g) else None


# periodic points ----------------------------------------------------------


@dataclass
class PeriodicWitness:
    """omega_{n*k}(point) == point verified exactly for every k <= k_max.

    ``point`` is a Fraction, a closed IntervalSet of such points, or None
    when the whole space is periodic (omega_{n*k} is the identity).
    """

    point: object
    n: int
    k_max: int
    whole_space: bool = False

    def to_json(self):
        from .serialize import jsonable

        return {
            "point": "all" if self.whole_space else jsonable(self.point),
            "n": self.n,
            "k_max": self.k_max,
        }


def _segment_map(F: Family, start: int, length: int):
    """f_{start+length} o ... o f_{start+1}."""
    out = F.identity()
    for k in range(start + 1, start + length + 1):
        out = compose_maps(F.member(k), out)
    return out


def verify_periodic(F: Family, point, n: int, k_max: int) -> bool:
    """Exact check of omega_{n*k}(point) == point for k = 1..k_max."""
    if point is None:
        return all(is_identity_map(omega(F, n * k)) for k in range(1, k_max + 1))
    if isinstance(point, IntervalSet):
        # omega_{nk} = S_k o omega_{n(k-1)} with S_k the k-th block of n members
        for k in range(1, k_max + 1):
            if not _segment_map(F, n * (k - 1), n).is_identity_on(point):
                return False
        return True
    x = point
    y = x
    step = 0
    for k in range(1, k_max + 1):
        while step < n * k:
            step += 1
            y = apply_map(F.member(step), y)
        if y != x:
            return False
    return True


def find_periodic_points(F: Family, period_cap: int, multiple_cap: int) -> list[PeriodicWitness]:
    """Exact periodic points with period <= period_cap.

    Interval families: fixed points of omega_n for each n, kept only if not
    already found at a smaller n and verified for k <= multiple_cap.
    Rotation, shift and twist families: omega_n moves every point unless it
    is the identity, so witnesses are whole-space ones.
    """
    if period_cap < 1 or multiple_cap < 1:
        raise ValueError("period_cap and multiple_cap must be >= 1")
    out: list[PeriodicWitness] = []
    if F.space != "interval":
        for n in range(1, period_cap + 1):
            if is_identity_map(omega(F, n)):
                if verify_periodic(F, None, n, multiple_cap):
                    out.append(PeriodicWitness(None, n, multiple_cap, whole_space=True))
                    break
        return out
    covered = IntervalSet.empty()
    seen_points: set = set()
    for n in range(1, period_cap + 1):
        w = omega(F, n)
        for item in solve_fixed_points(w):
            if isinstance(item, IntervalSet):
                fresh = item - covered
                if fresh.is_empty():
                    continue
                if verify_periodic(F, item, n, multiple_cap):
                    out.append(PeriodicWitness(item, n, multiple_cap))
                    covered = covered | item
            else:
                if item in seen_points or item in covered:
                    continue
                if verify_periodic(F, item, n, multiple_cap):
                    out.append(PeriodicWitness(item, n, multiple_cap))
                    seen_points.add(item)
    return out


# witness transfer from g to the family --------------------------------------


@dataclass(frozen=True)
class GPeriodic:
    """g**k(point) == point."""

    point: object
    k: int


@dataclass(frozen=True)
class GHit:
    """g**k(U) meets V."""

    U: object
    V: object
    k: int


@dataclass(frozen=True)
class FamilyHit:
    U: object
    V: object
    index: int


def _g_power(g, k):
    out = g
    for _ in range(k - 1):
        out = compose_maps(g, out)
    return out


def _meets(A, B) -> bool:
    if isinstance(A, IntervalSet):
        return A.intersects(B)
    from .spaces import cylinder_intersect

    return cylinder_intersect(A, B) is not None


def transfer_witness_from_autonomous(
    witness: Union[GPeriodic, GHit], F: Family, multiple_cap: int = 4
):
    """Lift a verified witness for g = f_n o ... o f_1 to the family.

    A g-periodic point with g**k(x) = x becomes an omega_{nk}-periodic point;
    a hit g**k(U) meets V becomes omega_{nk}(U) meets V. Both are re-verified
    through the family itself.
    """
    red = reduce_to_autonomous(F)
    g, n = red.g, red.n
    if isinstance(witness, GPeriodic):
        if apply_map(_g_power(g, witness.k), witness.point) != witness.point:
            raise ValueError("input is not a periodic point of g")
        index = n * witness.k
        if not verify_periodic(F, witness.point, index, multiple_cap):
            raise TransferFailed(f"omega_{index} does not fix {witness.point}")
        return PeriodicWitness(witness.point, index, multiple_cap)
    if isinstance(witness, GHit):
        S = witness.U
        for _ in range(witness.k):
            S = map_image(g, S)
        if not _meets(S, witness.V):
            raise ValueError("input is not a transitivity hit for g")
        index = n * witness.k
        if not _meets(image_at(F, witness.U, index), witness.V):
            raise TransferFailed(f"omega_{index}(U) misses V")
        return FamilyHit(witness.U, witness.V, index)
    raise TypeError(f"unknown witness type {type(witness).__name__}")
