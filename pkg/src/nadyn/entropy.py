"""Topological entropy of interval families.

Two estimators:

* the open-cover definition, with exact minimal subcover sizes of the
  joined pullback covers C v omega_1^-1(C) v ... v omega_{k-1}^-1(C);
* the lap-number growth rate of omega_k, used as an independent oracle.

Both report the limsup and the liminf of H_k / k over the tail window
(the last ceil(K/2) depths), plus the average increment of H_k across
that window. Logs are natural; log2 values are added in
serialized form.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

from .engine import Family, chained_preimage, omega, reduce_to_autonomous
from .errors import NotACover, UnsupportedComposition
from .exact import rat
from .intervals import IntervalSet
from .plmap import iterate, lap_count
from .serialize import sig12

EXACT_CAP = 24


@dataclass(frozen=True)
class Cover:
    """Open rational intervals whose union contains [0, 1]."""

    elements: tuple

    def __post_init__(self):
        elems = tuple((rat(lo), rat(hi)) for lo, hi in self.elements)
        if not elems:
            raise NotACover("a cover needs at least one element")
        for lo, hi in elems:
            if not lo < hi:
                raise NotACover(f"empty cover element ({lo}, {hi})")
        object.__setattr__(self, "elements", elems)
        if IntervalSet.union_all(IntervalSet.clipped_open(lo, hi) for lo, hi in elems) != IntervalSet.unit():
            raise NotACover("elements do not cover [0, 1]")

    def __len__(self):
        return len(self.elements)

    def clipped(self) -> list[IntervalSet]:
        return [IntervalSet.clipped_open(lo, hi) for lo, hi in self.elements]

    def to_joined(self) -> JoinedCover:
        return JoinedCover(self.clipped())

    def __str__(self):
        return "{" + ", ".join(f"({lo}, {hi})" for lo, hi in self.elements) + "}"


@dataclass(frozen=True)
class JoinedCover:
    """Relatively open subsets of [0, 1] (finite unions of intervals) covering it."""

    elements: tuple

    def __init__(self, elements, check: bool = True):
        elems = tuple(e for e in elements if not e.is_empty())
        object.__setattr__(self, "elements", elems)
        if check and IntervalSet.union_all(elems) != IntervalSet.unit():
            raise NotACover("elements do not cover [0, 1]")

    def __len__(self):
        return len(self.elements)


def mesh_cover(m: int) -> Cover:
    """The m mesh cells widened by 1/(4m) on each side."""
    if m < 1:
        raise ValueError("mesh cover needs m >= 1")
    pad = Fraction(1, 4 * m)
    return Cover(tuple((Fraction(i, m) - pad, Fraction(i + 1, m) + pad) for i in range(m)))


# minimal subcovers ----------------------------------------------------------


def _endpoints(elements: Sequence[IntervalSet]) -> list[Fraction]:
    return sorted({Fraction(0), Fraction(1)} | {x for e in elements for c in e for x in (c.lo, c.hi)})


def _atom_masks(elements: Sequence[IntervalSet], pts: Optional[list] = None) -> tuple[list[int], int]:
    """Bitmask of each element over the atoms of [0, 1].

    The endpoints 0 = p_0 < ... < p_r = 1 (all element endpoints unless
    ``pts`` is given) split [0, 1] into points p_i (atom 2i) and open gaps
    (p_i, p_{i+1}) (atom 2i+1); every element is a union of atoms.
    """
    if pts is None:
        pts = _endpoints(elements)
    masks = []
    for e in elements:
        mask = 0
        for c in e:
            a, b = bisect_left(pts, c.lo), bisect_left(pts, c.hi)
            if a == b:
                if not (c.lo_open or c.hi_open):
                    mask |= 1 << (2 * a)
                continue
            lo_bit = 2 * a + (1 if c.lo_open else 0)
            hi_bit = 2 * b - (1 if c.hi_open else 0)
            mask |= ((1 << (hi_bit + 1)) - 1) ^ ((1 << lo_bit) - 1)
        masks.append(mask)
    return masks, (1 << (2 * len(pts) - 1)) - 1


def _bits(x: int) -> list[int]:
    """Positions of the set bits of x, in increasing order."""
    raw = np.frombuffer(x.to_bytes((x.bit_length() + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).tolist()


def _drop_dominated(masks: Sequence[int]) -> list[int]:
    """Distinct masks not contained in another.

    A mask can only sit inside masks that contain its lowest atom, so
    candidates are looked up through that atom.
    """
    uniq = sorted(set(m for m in masks if m), key=lambda x: (-x.bit_count(), x))
    kept: list[int] = []
    by_atom: dict[int, list[int]] = {}
    for x in uniq:
        low = (x & -x).bit_length() - 1
        if any(x & y == x for y in by_atom.get(low, ())):
            continue
        kept.append(x)
        for b in _bits(x):
            by_atom.setdefault(b, []).append(x)
    return kept


def _reduce_atoms(masks: list[int], universe: int) -> tuple[list[int], int]:
    """Merge atoms covered by exactly the same elements into one."""
    coverers: dict[int, int] = {}
    for i, x in enumerate(masks):
        for b in _bits(x & universe):
            coverers[b] = coverers.get(b, 0) | (1 << i)
    keys = sorted(set(coverers.values()))
    new = [0] * len(masks)
    for a, k in enumerate(keys):
        for i in _bits(k):
            new[i] |= 1 << a
    return new, (1 << len(keys)) - 1


def _greedy(masks: list[int], universe: int) -> list[int]:
    left, chosen = universe, []
    while left:
        i = max(range(len(masks)), key=lambda j: ((masks[j] & left).bit_count(), -j))
        chosen.append(i)
        left &= ~masks[i]
    return chosen


def _branch_and_bound(masks: list[int], universe: int) -> int:
    best = [len(_greedy(masks, universe))]
    atoms = [b for b in range(universe.bit_length()) if universe >> b & 1]
    cover_of = {b: [i for i, x in enumerate(masks) if x >> b & 1] for b in atoms}
    widest = max(x.bit_count() for x in masks)

    def search(left: int, used: int):
        if left == 0:
            best[0] = min(best[0], used)
            return
        if used + -(-left.bit_count() // widest) >= best[0]:
            return
        b = min((b for b in atoms if left >> b & 1), key=lambda b: len(cover_of[b]))
        for i in sorted(cover_of[b], key=lambda i: -(masks[i] & left).bit_count()):
            search(left & ~masks[i], used + 1)

    search(universe, 0)
    return best[0]


def _milp(masks: list[int], universe: int) -> Optional[int]:
    # atoms are already compacted to bits 0..n-1 of universe
    n_atoms = universe.bit_length()
    rows, cols = [], []
    for i, x in enumerate(masks):
        bits = _bits(x)
        rows.extend(bits)
        cols.extend([i] * len(bits))
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_atoms, len(masks)))
    res = milp(
        c=np.ones(len(masks)),
        constraints=LinearConstraint(A, lb=1, ub=np.inf),
        integrality=np.ones(len(masks)),
        bounds=Bounds(0, 1),
        options={"mip_rel_gap": 0.0},
    )
    if res.status != 0:
        return None
    chosen = [i for i, v in enumerate(res.x) if v > 0.5]
    left = universe
    for i in chosen:
        left &= ~masks[i]
    if left:
        return None
    return len(chosen)


@dataclass(frozen=True)
class SubcoverResult:
    size: int
    exact: bool
    method: str


def min_subcover(C: JoinedCover) -> SubcoverResult:
    """Minimum number of elements of C still covering [0, 1].

    Exact branch-and-bound when at most EXACT_CAP elements survive the
    reductions, an exact integer program beyond that, and a greedy upper
    bound (flagged inexact) only if the solver gives up.
    """
    if not C.elements:
        raise NotACover("empty cover")
    masks, universe = _atom_masks(C.elements)
    return _min_subcover_masks(masks, universe)


def _min_subcover_masks(masks: list[int], universe: int) -> SubcoverResult:
    union = 0
    for x in masks:
        union |= x
    if union & universe != universe:
        raise NotACover("elements do not cover [0, 1]")
    masks = _drop_dominated([x & universe for x in masks])
    masks, universe = _reduce_atoms(masks, universe)
    if len(masks) == 1:
        return SubcoverResult(1, True, "trivial")
    if len(masks) <= EXACT_CAP:
        return SubcoverResult(_branch_and_bound(masks, universe), True, "branch-and-bound")
    size = _milp(masks, universe)
    if size is not None:
        return SubcoverResult(size, True, "integer-program")
    return SubcoverResult(len(_greedy(masks, universe)), False, "greedy-upper-bound")


def min_subcover_cardinality(C) -> int:
    if isinstance(C, Cover):
        C = C.to_joined()
    return min_subcover(C).size


def _prune(elements: Sequence[IntervalSet]) -> list[IntervalSet]:
    # dominated elements never matter for minimal subcovers of later joins
    uniq = list(dict.fromkeys(e for e in elements if not e.is_empty()))
    uniq.sort(key=lambda e: (-e.measure(), str(e)))
    kept: list[IntervalSet] = []
    for e in uniq:
        if not any(e.issubset(k) for k in kept):
            kept.append(e)
    return kept


def join(C1: JoinedCover, C2: JoinedCover, prune: bool = False) -> JoinedCover:
    """All nonempty pairwise intersections U & V."""
    elems = [U & V for U in C1.elements for V in C2.elements]
    elems = [e for e in elems if not e.is_empty()]
    if prune:
        elems = _prune(elems)
    return JoinedCover(elems, check=False)


def _require_pl(F: Family):
    if F.space != "interval" or not F.is_finite:
        raise UnsupportedComposition("entropy needs a finite cyclic family of interval maps")


def pullback(F: Family, k: int, C) -> JoinedCover:
    """omega_k^-1 of every element of C (omega_0 is the identity)."""
    _require_pl(F)
    elems = C.clipped() if isinstance(C, Cover) else list(C.elements)
    return JoinedCover([chained_preimage(F, e, k) for e in elems], check=False)


# estimates -----------------------------------------------------------------


@dataclass(frozen=True)
class EntropyTerm:
    k: int
    count: int
    exact: bool = True

    @property
    def H(self) -> float:
        return math.log(self.count)

    @property
    def rate(self) -> float:
        return self.H / self.k


@dataclass
class EntropyEstimate:
    method: str
    per_k: list
    limsup_est: float = field(init=False)
    liminf_est: float = field(init=False)
    increment_est: float = field(init=False)

    def __post_init__(self):
        # H_k / k carries a log|C| / k offset that vanishes only as k grows;
        # the tail increment (H_K - H_{K-t}) / t cancels it
        K = len(self.per_k)
        t = math.ceil(K / 2)
        tail = [term.rate for term in self.per_k[K - t:]]
        self.limsup_est = max(tail)
        self.liminf_est = min(tail)
        if K > t:
            self.increment_est = (self.per_k[-1].H - self.per_k[K - t - 1].H) / t
        else:
            self.increment_est = self.per_k[-1].rate

    @property
    def exact(self) -> bool:
        return all(t.exact for t in self.per_k)

    def to_json(self):
        ln2 = math.log(2)
        return {
            "method": self.method,
            "exact_counts": self.exact,
            "per_k": [
                {"k": t.k, "count": t.count, "exact": t.exact, "H": sig12(t.H), "H_over_k": sig12(t.rate)}
                for t in self.per_k
            ],
            "limsup_est": sig12(self.limsup_est),
            "liminf_est": sig12(self.liminf_est),
            "limsup_est_log2": sig12(self.limsup_est / ln2),
            "liminf_est_log2": sig12(self.liminf_est / ln2),
            "increment_est": sig12(self.increment_est),
            "increment_est_log2": sig12(self.increment_est / ln2),
        }


def _joined_masks(F: Family, C: Cover, K: int):
    """Yield (k, masks) for the depth-k joined cover, k = 1..K.

    All depths share one atom partition: the endpoints of every
    omega_j^-1(C) with j < K. Joins become bitwise ANDs, and dominated
    elements are dropped as we go, which never changes a later minimum.
    """
    _require_pl(F)
    base = C.clipped()
    pulls = [base] + [[chained_preimage(F, e, j) for e in base] for j in range(1, K)]
    pts = _endpoints([e for layer in pulls for e in layer])
    layers = [_atom_masks(layer, pts)[0] for layer in pulls]
    universe = (1 << (2 * len(pts) - 1)) - 1
    cur = _drop_dominated(layers[0])
    yield 1, cur, universe
    for k in range(2, K + 1):
        cur = _drop_dominated([a & b for a in cur for b in layers[k - 1]])
        yield k, cur, universe


def joined_covers(F: Family, C: Cover, K: int):
    """Yield (k, C v omega_1^-1(C) v ... v omega_{k-1}^-1(C)) for k = 1..K, pruned."""
    _require_pl(F)
    cur = JoinedCover(_prune(C.clipped()), check=False)
    yield 1, cur
    for k in range(2, K + 1):
        cur = join(cur, pullback(F, k - 1, C), prune=True)
        yield k, cur


def cover_entropy(F: Family, C: Cover, K: int) -> EntropyEstimate:
    if K < 2:
        raise ValueError("cover entropy needs depth K >= 2")
    terms = []
    for k, masks, universe in _joined_masks(F, C, K):
        r = _min_subcover_masks(masks, universe)
        terms.append(EntropyTerm(k, r.size, r.exact))
    return EntropyEstimate("cover", terms)


def mesh_ladder(F: Family, K: int, ms: Sequence[int] = (2, 4, 8)) -> dict:
    """cover_entropy for each mesh cover; the best limsup is the ladder value."""
    runs = {m: cover_entropy(F, mesh_cover(m), K) for m in ms}
    best = max(runs, key=lambda m: runs[m].limsup_est)
    return {"per_mesh": runs, "best_m": best, "best_limsup": runs[best].limsup_est}


def lap_entropy(F: Family, K: int) -> EntropyEstimate:
    """(1/k) log lap(omega_k) for k = 1..K with exact lap counts."""
    _require_pl(F)
    if K < 1:
        raise ValueError("lap entropy needs depth K >= 1")
    return EntropyEstimate("lap", [EntropyTerm(k, lap_count(omega(F, k))) for k in range(1, K + 1)])


@dataclass
class Comparison:
    n: int
    K: int
    h_F: EntropyEstimate
    h_g: EntropyEstimate
    tolerance: float
    lap_identity: bool
    cover_refinement: Optional[bool] = None

    @property
    def gap(self) -> float:
        return self.h_F.limsup_est - self.h_g.limsup_est / self.n

    @property
    def inequality_holds(self) -> bool:
        return self.gap >= -self.tolerance

    def to_json(self):
        return {
            "n": self.n,
            "K": self.K,
            "h_F_est": self.h_F.to_json(),
            "h_g_est": self.h_g.to_json(),
            "tolerance": self.tolerance,
            "gap": sig12(self.gap),
            "inequality_holds_at_K": self.inequality_holds,
            "lap_identity_holds": self.lap_identity,
            "cover_refinement_holds": self.cover_refinement,
        }


def compare_family_vs_composition(F: Family, K: int, tolerance: float = 0.05, cover: Optional[Cover] = None) -> Comparison:
    """Lap estimates for F at depth K and for g = f_n o ... o f_1 at depth K // n.

    The tail windows line up: omega_{nj} = g^j, so F's tail contains every
    g-depth of g's tail at index nj. The report also checks
    lap(omega_{nj}) == lap(g^j) for j <= K // n, and, given a cover, the
    refinement bound N_F(nj) >= N_g(j).
    """
    _require_pl(F)
    red = reduce_to_autonomous(F)
    n, g = red.n, red.g
    Kg = max(1, K // n)
    h_F = lap_entropy(F, K)
    G = Family.autonomous(g, budget=F.budget)
    h_g = lap_entropy(G, Kg)
    identity = all(lap_count(iterate(g, j)) == h_F.per_k[n * j - 1].count for j in range(1, Kg + 1) if n * j <= K)
    refinement = None
    if cover is not None:
        NF = {k: _min_subcover_masks(M, u).size for k, M, u in _joined_masks(F, cover, n * Kg)}
        NG = {k: _min_subcover_masks(M, u).size for k, M, u in _joined_masks(G, cover, Kg)}
        refinement = all(NF[n * j] >= NG[j] for j in range(1, Kg + 1))
    return Comparison(n, K, h_F, h_g, tolerance, identity, refinement)
