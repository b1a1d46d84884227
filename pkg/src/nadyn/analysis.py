"""Finite-scale detectors for transitivity, mixing, periodicity and chaos.

Every "for all open sets" is truncated to the m cells of a mesh and every
limit to a horizon N. A verdict carries those parameters and one of four
statuses:

* ``CertifiedTrue`` / ``CertifiedFalse``: an exact certificate proves the
  property or its failure outright (an identity omega_p, an invariant trap).
* ``VerifiedAtScale`` / ``RefutedAtScale``: the property holds or fails on
  the given mesh within the given horizon; nothing is claimed beyond it.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .engine import (
    Family,
    GHit,
    GPeriodic,
    apply_map,
    find_periodic_points,
    forward_images,
    identity_collapse,
    map_image,
    omega,
    orbit,
    reduce_to_autonomous,
    transfer_witness_from_autonomous,
)
from .errors import UnsupportedSpace
from .exact import rat
from .intervals import IntervalSet, mesh_cells
from .plmap import PLMap, compose, image, iterate, solve_fixed_points
from .serialize import jsonable
from .spaces import (
    CirclePoint,
    CylPoint,
    Cylinder,
    ShiftPoint,
    arc_distance,
    cyl_distance,
    cylinder_intersect,
    distance_to_unit,
    shift_distance,
    shift_mesh,
)


class Status(str, enum.Enum):
    CERTIFIED_TRUE = "CertifiedTrue"
    VERIFIED = "VerifiedAtScale"
    REFUTED = "RefutedAtScale"
    CERTIFIED_FALSE = "CertifiedFalse"

    @property
    def holds(self) -> bool:
        return self in (Status.CERTIFIED_TRUE, Status.VERIFIED)


@dataclass(frozen=True)
class MeshParams:
    """Mesh resolution m, horizon N, tolerance eps and tail window.

    Defaults: eps = 1/(4m), eps_prime = 1/(64m), tail = N // 2.
    """

    m: int = 16
    N: int = 64
    eps: Optional[Fraction] = None
    tail: Optional[int] = None
    eps_prime: Optional[Fraction] = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("mesh resolution m must be >= 2")
        if self.N < 1:
            raise ValueError("horizon N must be >= 1")
        eps = Fraction(1, 4 * self.m) if self.eps is None else rat(self.eps)
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        tail = max(1, self.N // 2) if self.tail is None else self.tail
        if not 1 <= tail <= self.N:
            raise ValueError("tail must lie in [1, N]")
        eps_p = Fraction(1, 64 * self.m) if self.eps_prime is None else rat(self.eps_prime)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "eps_prime", eps_p)

    def to_json(self):
        return {"m": self.m, "N": self.N, "eps": str(self.eps), "eps_prime": str(self.eps_prime), "tail": self.tail}


@dataclass
class Verdict:
    prop: str
    status: Status
    witness: dict
    params: MeshParams
    label: str = ""

    @property
    def holds(self) -> bool:
        return self.status.holds

    def to_json(self):
        out = {
            "property": self.prop,
            "status": self.status.value,
            "params": self.params.to_json(),
            "witness": jsonable(self.witness),
        }
        if self.label:
            out["label"] = self.label
        return out


# shared machinery ---------------------------------------------------------


def _require(F: Family, spaces, what: str):
    if F.space not in spaces:
        raise UnsupportedSpace(f"{what} is not available on the {F.space} space")


def _cells(F: Family, m: int):
    if F.space == "interval":
        return mesh_cells(m)
    if F.space == "shift":
        return shift_mesh(m)
    raise UnsupportedSpace(f"no open-set mesh on the {F.space} space")


def _meets(A, B) -> bool:
    if isinstance(A, IntervalSet):
        return A.intersects(B)
    return cylinder_intersect(A, B) is not None


def _near_whole_space(S, eps, cells) -> bool:
    """Interval: d_H(closure S, [0, 1]) < eps. Shift: S meets every mesh cylinder."""
    if isinstance(S, IntervalSet):
        return not S.is_empty() and distance_to_unit(S) < eps
    return all(cylinder_intersect(S, C) is not None for C in cells)


def _collapse_certificate(F: Family, cells) -> Optional[dict]:
    """A pair of cells no omega_n ever connects, when omega_p = id.

    With omega_p the identity, omega_{n+p} = omega_n, so checking
    omega_1..omega_p settles every n.
    """
    q = identity_collapse(F)
    if q is None:
        return None
    for U in cells:
        images = [S for _, S in forward_images(F, U, q)]
        for V in cells:
            if not any(_meets(S, V) for S in images):
                return {"omega_identity_index": q, "U": U, "V": V}
    return None


def find_invariant_trap(g: PLMap, denominator: int = 64, max_iter: int = 64) -> Optional[IntervalSet]:
    """A proper closed set A with interior and g(A) inside A, or None.

    Seeds are the consecutive cells of a lattice made of g's breakpoints,
    their images and the multiples of 1/D, for D = 1, 2, 4, ... up to
    ``denominator``. Each seed grows to A u g(A) u g(g(A)) ... until it stops
    changing. The coarsest lattice that yields a trap wins, and within it
    the trap of least measure (ties broken by text form).
    """
    base = set(g.xs) | set(g.ys)
    unit = IntervalSet.unit()
    tried = set()
    D = 1
    while D <= denominator:
        lattice = sorted(base | {Fraction(k, D) for k in range(D + 1)})
        found = {}
        for a, b in zip(lattice, lattice[1:]):
            if (a, b) in tried:
                continue
            tried.add((a, b))
            A = IntervalSet.closed(a, b)
            for _ in range(max_iter):
                B = A | image(g, A)
                if B == A or B == unit:
                    break
                A = B
            else:
                continue
            if A != unit and image(g, A).issubset(A):
                found[A] = None
        if found:
            return min(found, key=lambda T: (T.measure(), str(T)))
        D *= 2
    return None


def _trap_certificate(F: Family) -> Optional[dict]:
    """Invariant trap of g whose orbit under the family stays proper.

    If g(A) is inside A then omega_n(A) lies in B = A u omega_1(A) u ... u
    omega_{p-1}(A) for every n. When B misses an open set V, the interior of
    A never reaches V.
    """
    if F.space != "interval" or not F.is_finite:
        return None
    red = reduce_to_autonomous(F)
    A = find_invariant_trap(red.g)
    if A is None:
        return None
    B = A
    for _, S in forward_images(F, A, F.period - 1):
        B = B | S
    if B == IntervalSet.unit():
        return None
    V = B.complement()
    U = IntervalSet([(c.lo, c.hi, True, True) for c in A if c.lo < c.hi])
    return {"trap": A, "orbit_union": B, "U": U, "V": V}


def non_transitivity_certificate(F: Family, cells) -> Optional[dict]:
    cert = _collapse_certificate(F, cells)
    if cert is not None:
        return {"kind": "identity-collapse", **cert}
    cert = _trap_certificate(F)
    if cert is not None:
        return {"kind": "invariant-trap", **cert}
    return None


# transitivity and mixing ---------------------------------------------------


def check_transitivity(F: Family, p: MeshParams = MeshParams()) -> Verdict:
    """Every ordered pair of mesh cells (U, V) has omega_n(U) meeting V for some n <= N."""
    _require(F, ("interval", "shift"), "transitivity")
    cells = _cells(F, p.m)
    cert = non_transitivity_certificate(F, cells)
    if cert is not None:
        return Verdict("transitivity", Status.CERTIFIED_FALSE, cert, p)
    first_hit = [[None] * len(cells) for _ in cells]
    for i, U in enumerate(cells):
        todo = set(range(len(cells)))
        for n, S in forward_images(F, U, p.N):
            for j in [j for j in todo if _meets(S, cells[j])]:
                first_hit[i][j] = n
                todo.discard(j)
            if not todo:
                break
    missing = [(i, j) for i in range(len(cells)) for j in range(len(cells)) if first_hit[i][j] is None]
    if missing:
        return Verdict(
            "transitivity",
            Status.REFUTED,
            {"missing_pairs": len(missing), "examples": [(cells[i], cells[j]) for i, j in missing[:5]]},
            p,
        )
    worst = max(max(row) for row in first_hit)
    return Verdict("transitivity", Status.VERIFIED, {"first_hit": first_hit, "max_first_hit": worst}, p)


def check_weak_mixing(F: Family, m_sets: Optional[Sequence] = None, p: MeshParams = MeshParams()) -> Verdict:
    """Some r <= N brings omega_r(U_i) within eps of the whole space for every U_i at once.

    With m_sets the full mesh (the default) this is the simultaneous
    m-fold transitivity test.
    """
    _require(F, ("interval", "shift"), "weak mixing")
    cells = _cells(F, p.m)
    cert = non_transitivity_certificate(F, cells)
    if cert is not None:
        return Verdict("weak_mixing", Status.CERTIFIED_FALSE, cert, p, label="not transitive")
    sets = list(m_sets) if m_sets is not None else cells
    whole = IntervalSet.unit()
    current = list(sets)
    simultaneous = []
    full_indices = [[] for _ in sets]
    for n in range(1, p.N + 1):
        f = F.member(n)
        current = [map_image(f, S) for S in current]
        close = True
        for i, S in enumerate(current):
            if isinstance(S, IntervalSet) and S == whole:
                full_indices[i].append(n)
            if close and not _near_whole_space(S, p.eps, cells):
                close = False
        if close:
            simultaneous.append(n)
    witness = {"simultaneous_indices": simultaneous}
    if F.space == "interval":
        witness["full_indices"] = full_indices
    if simultaneous:
        witness["first_simultaneous_index"] = simultaneous[0]
        return Verdict("weak_mixing", Status.VERIFIED, witness, p)
    return Verdict("weak_mixing", Status.REFUTED, witness, p)


def check_topological_mixing(F: Family, p: MeshParams = MeshParams()) -> Verdict:
    """Each cell U has K with omega_n(U) within eps of the whole space for all n in [K, N].

    K may be at most N - tail + 1, so the stretch covers the tail window.
    """
    _require(F, ("interval", "shift"), "topological mixing")
    cells = _cells(F, p.m)
    cert = non_transitivity_certificate(F, cells)
    if cert is not None:
        return Verdict("topological_mixing", Status.CERTIFIED_FALSE, cert, p, label="not transitive")
    # K must leave a stretch [K, N] at least as long as the tail window;
    # otherwise K = N would pass on the strength of a single index
    latest = p.N - p.tail + 1
    profile = []
    for U in cells:
        K = None
        for n, S in forward_images(F, U, p.N):
            if _near_whole_space(S, p.eps, cells):
                if K is None:
                    K = n
            else:
                K = None
        profile.append(K if K is not None and K <= latest else None)
    if all(K is not None for K in profile):
        return Verdict("topological_mixing", Status.VERIFIED, {"K": profile, "max_K": max(profile)}, p)
    bad = [i for i, K in enumerate(profile) if K is None]
    return Verdict("topological_mixing", Status.REFUTED, {"K": profile, "failing_cells": [cells[i] for i in bad]}, p)


# periodicity and minimality ------------------------------------------------


def check_dense_periodicity(
    F: Family, p: MeshParams = MeshParams(), period_cap: Optional[int] = None, multiple_cap: int = 4
) -> Verdict:
    """Every mesh cell holds a periodic point of period <= period_cap.

    period_cap defaults to min(N, 8); interval compositions grow
    exponentially in the period.
    """
    period_cap = min(p.N, 8) if period_cap is None else period_cap
    q = identity_collapse(F)
    if q is not None:
        least = next(n for n in range(1, q + 1) if q % n == 0 and omega(F, n).is_identity())
        return Verdict(
            "dense_periodicity",
            Status.CERTIFIED_TRUE,
            {"omega_identity_index": q, "period": least, "points": "all"},
            p,
        )
    witnesses = find_periodic_points(F, period_cap, multiple_cap)
    if F.space != "interval":
        if witnesses:
            w = witnesses[0]
            return Verdict("dense_periodicity", Status.VERIFIED, {"period": w.n, "points": "all", "k_max": w.k_max}, p)
        return Verdict(
            "dense_periodicity",
            Status.REFUTED,
            {"no_return_checked": [1, period_cap], "omega_n_identity_for": []},
            p,
        )
    cells = mesh_cells(p.m)
    per_cell = []
    for U in cells:
        hit = None
        for w in witnesses:
            if isinstance(w.point, IntervalSet):
                if w.point.intersects(U):
                    hit = w
                    break
            elif w.point in U:
                hit = w
                break
        per_cell.append(hit)
    witness = {
        "periodic_points_found": len(witnesses),
        "per_cell": [None if w is None else w.to_json() for w in per_cell],
    }
    if all(w is not None for w in per_cell):
        return Verdict("dense_periodicity", Status.VERIFIED, witness, p)
    return Verdict("dense_periodicity", Status.REFUTED, witness, p)


def _cell_index(x: Fraction, m: int) -> Optional[int]:
    # index of the open cell (j/m, (j+1)/m) containing x
    y = x * m
    if y.denominator == 1:
        return None
    j = y.numerator // y.denominator
    return j if 0 <= j < m else None


def _cell_of(point, m: int, F: Family):
    if F.space == "interval":
        return _cell_index(point, m)
    if F.space == "circle":
        if not point.angle.is_rational:
            raise UnsupportedSpace("cannot place an irrational angle in a mesh cell exactly")
        return _cell_index(point.angle.a, m)
    if F.space == "cylinder":
        if not point.theta.is_rational:
            raise UnsupportedSpace("cannot place an irrational angle in a mesh cell exactly")
        a, b = _cell_index(point.r, m), _cell_index(point.theta.a, m)
        return None if a is None or b is None else (a, b)
    cells = shift_mesh(m)
    for i, C in enumerate(cells):
        if point in C:
            return i
    return None


def _cell_count(F: Family, m: int) -> int:
    if F.space == "cylinder":
        return m * m
    if F.space == "shift":
        return len(shift_mesh(m))
    return m


def check_minimality(F: Family, sample_points: Sequence, p: MeshParams = MeshParams()) -> Verdict:
    """Dense-orbit check: each sampled orbit visits every mesh cell by step N.

    A dense orbit is necessary for minimality but not sufficient, so a pass
    is reported as a dense-orbit check and never as certified minimality.
    """
    total = _cell_count(F, p.m)
    per_point = []
    ok = True
    for x in sample_points:
        pts = orbit(F, x, p.N)
        if len(set(pts)) < total:
            per_point.append({"point": x, "distinct_orbit_points": len(set(pts)), "cells_needed": total})
            ok = False
            continue
        seen = set()
        reached = None
        for n, y in enumerate(pts, start=1):
            c = _cell_of(y, p.m, F)
            if c is not None:
                seen.add(c)
                if len(seen) == total:
                    reached = n
                    break
        per_point.append({"point": x, "cells_visited": len(seen), "all_cells_by": reached})
        ok = ok and reached is not None
    status = Status.VERIFIED if ok else Status.REFUTED
    return Verdict("minimality", status, {"samples": per_point}, p, label="dense-orbit check")


# sensitivity ---------------------------------------------------------------


def check_sensitivity(F: Family, p: MeshParams = MeshParams(), delta=Fraction(1, 2)) -> Verdict:
    """Every cell U has some n <= N with diam(omega_n(U)) > delta.

    ``cofinite`` in the witness reports whether the bound holds on a whole
    final stretch [K, N] for every cell.
    """
    _require(F, ("interval", "cylinder"), "sensitivity")
    delta = rat(delta)
    q = identity_collapse(F)
    if q is not None:
        return Verdict(
            "sensitivity",
            Status.CERTIFIED_FALSE,
            {"omega_identity_index": q, "reason": "omega cycles through finitely many uniformly continuous maps"},
            p,
        )
    if F.space == "cylinder":
        diams = [omega(F, n).cell_image_diameter(p.m) for n in range(1, p.N + 1)]
        profiles = [diams]
    else:
        profiles = [[S.diameter() for _, S in forward_images(F, U, p.N)] for U in mesh_cells(p.m)]
    first, cof = [], []
    for diams in profiles:
        above = [n for n, d in enumerate(diams, start=1) if d > delta]
        first.append(above[0] if above else None)
        K = None
        for n, d in enumerate(diams, start=1):
            if d > delta:
                if K is None:
                    K = n
            else:
                K = None
        cof.append(K if K is not None and K <= p.N - p.tail + 1 else None)
    witness = {"delta": delta, "first_index": first, "cofinite_K": cof, "cofinite": all(k is not None for k in cof)}
    if all(n is not None for n in first):
        return Verdict("sensitivity", Status.VERIFIED, witness, p)
    return Verdict("sensitivity", Status.REFUTED, witness, p)


# Li-Yorke -----------------------------------------------------------------


def _metric(space: str):
    return {
        "interval": lambda x, y: abs(x - y),
        "circle": arc_distance,
        "shift": shift_distance,
        "cylinder": cyl_distance,
    }[space]


@dataclass
class PairResult:
    x: object
    y: object
    limsup_est: Fraction
    liminf_est: Fraction
    scrambled: bool
    exact: bool = False

    def to_json(self):
        return {
            "pair": [jsonable(self.x), jsonable(self.y)],
            "limsup_est": jsonable(self.limsup_est),
            "liminf_est": jsonable(self.liminf_est),
            "scrambled": self.scrambled,
            "exact": self.exact,
        }


@dataclass
class ScrambledReport:
    pairs: list
    period3_cycles: list
    li_yorke: bool
    family_witnesses: list = field(default_factory=list)
    params: Optional[MeshParams] = None

    @property
    def scrambled_pairs(self) -> list:
        return [r for r in self.pairs if r.scrambled]

    def to_json(self):
        return {
            "property": "li_yorke",
            "li_yorke_certified": self.li_yorke,
            "period3_cycles": jsonable(self.period3_cycles),
            "family_period3_witnesses": jsonable(self.family_witnesses),
            "pairs_checked": len(self.pairs),
            "scrambled_at_scale": [r.to_json() for r in self.scrambled_pairs],
            "sample": [r.to_json() for r in self.pairs[:10]],
            "params": self.params.to_json() if self.params else None,
        }


def period3_cycles(g: PLMap) -> list[list[Fraction]]:
    """Cycles of least period 3 of g, each starting at its smallest point."""
    g3 = iterate(g, 3)
    fixed_g = {x for x in solve_fixed_points(g) if not isinstance(x, IntervalSet)}
    cycles = []
    seen = set()
    for x in solve_fixed_points(g3):
        if isinstance(x, IntervalSet) or x in fixed_g or x in seen:
            continue
        cyc = [x, apply_map(g, x)]
        cyc.append(apply_map(g, cyc[1]))
        seen.update(cyc)
        cycles.append(cyc)
    return sorted(cycles)


def default_candidates(F: Family, denominator: int = 32) -> list:
    if F.space == "interval":
        pts = [Fraction(k, denominator) for k in range(denominator + 1)]
        if F.is_finite:
            for n in (1, 2, 3):
                for x in solve_fixed_points(omega(F, n)):
                    if not isinstance(x, IntervalSet) and x not in pts:
                        pts.append(x)
        return pts
    if F.space == "shift":
        words = []
        for length in (1, 2, 3):
            for code in range(2**length):
                w = format(code, f"0{length}b")
                words.extend(ShiftPoint(w, k) for k in range(length))
        return list(dict.fromkeys(words))
    if F.space == "circle":
        return [CirclePoint(Fraction(k, denominator)) for k in range(denominator)]
    return [CylPoint(Fraction(k, 8), Fraction(j, 8)) for k in range(9) for j in range(8)]


def find_scrambled_pairs(F: Family, candidates: Optional[Sequence] = None, p: MeshParams = MeshParams()) -> ScrambledReport:
    """Tail-window limsup/liminf of orbit distances for candidate pairs.

    ``candidates`` is a list of points (all pairs are tried) or of 2-tuples.
    When omega collapses to a cycle of length q the distance sequence is
    exactly q-periodic, so the window max/min are the true limsup/liminf and
    the pair result is marked exact. For finite interval families a
    least-period-3 cycle of g certifies Li-Yorke chaos of g, which carries
    over to the family.
    """
    if candidates is None:
        candidates = default_candidates(F)
    candidates = list(candidates)
    if candidates and isinstance(candidates[0], tuple) and len(candidates[0]) == 2 and F.space != "cylinder":
        pairs = candidates
    else:
        pairs = list(itertools.combinations(candidates, 2))
    d = _metric(F.space)
    q = identity_collapse(F)
    horizon = p.N
    window = p.tail
    if q is not None:
        horizon = max(q, 1)
        window = horizon
    cache = {}

    def orb(x):
        if x not in cache:
            cache[x] = orbit(F, x, horizon)
        return cache[x]

    results = []
    for x, y in pairs:
        ox, oy = orb(x), orb(y)
        tail = [d(a, b) for a, b in zip(ox[-window:], oy[-window:])]
        hi, lo = max(tail), min(tail)
        if q is not None:
            scrambled = hi > 0 and lo == 0
        else:
            scrambled = hi > p.eps and lo < p.eps_prime
        results.append(PairResult(x, y, hi, lo, scrambled, exact=q is not None))
    cycles, fam = [], []
    if F.space == "interval" and F.is_finite:
        red = reduce_to_autonomous(F)
        cycles = period3_cycles(red.g)
        for cyc in cycles:
            w = transfer_witness_from_autonomous(GPeriodic(cyc[0], 3), F)
            fam.append({"point": cyc[0], "omega_index": w.n, "k_max": w.k_max})
    return ScrambledReport(results, cycles, bool(cycles), fam, p)


def replay_transitivity_through_family(F: Family, p: MeshParams = MeshParams()) -> list:
    """Lift every g-level first hit to the family via omega_{n*k}.

    Runs the transitivity scan on g = f_n o ... o f_1 and pushes each
    (U, V, k) hit through ``transfer_witness_from_autonomous``.
    """
    red = reduce_to_autonomous(F)
    G = Family.autonomous(red.g, budget=F.budget)
    v = check_transitivity(G, p)
    if v.status is not Status.VERIFIED:
        return []
    cells = _cells(F, p.m)
    out = []
    for i, row in enumerate(v.witness["first_hit"]):
        for j, k in enumerate(row):
            out.append(transfer_witness_from_autonomous(GHit(cells[i], cells[j], k), F))
    return out
