import itertools
import math
import random
from fractions import Fraction as F

import pytest

from nadyn.cli import load_builtin
from nadyn.engine import Family
from nadyn.entropy import (
    Cover,
    JoinedCover,
    compare_family_vs_composition,
    cover_entropy,
    join,
    joined_covers,
    lap_entropy,
    mesh_cover,
    mesh_ladder,
    min_subcover,
    min_subcover_cardinality,
    pullback,
)
from nadyn.errors import NotACover, UnsupportedComposition
from nadyn.intervals import IntervalSet
from nadyn.plmap import PLMap, evaluate

from randfam import random_cover, random_family

TENT = Family.autonomous(PLMap.tent())
IDENT = Family.autonomous(PLMap.identity())


def brute_min(C: JoinedCover) -> int:
    elems = list(C.elements)
    unit = IntervalSet.unit()
    for r in range(1, len(elems) + 1):
        for sub in itertools.combinations(elems, r):
            if IntervalSet.union_all(sub) == unit:
                return r
    raise AssertionError("not a cover")


def test_subcover_examples():
    assert min_subcover_cardinality(Cover(((F(-1, 8), F(5, 8)), (F(3, 8), F(9, 8))))) == 2
    assert min_subcover_cardinality(Cover(((-1, 2),))) == 1
    C = Cover(
        (
            (F(-1, 8), F(3, 8)),
            (F(1, 4), F(5, 8)),
            (F(1, 2), F(7, 8)),
            (F(3, 4), F(9, 8)),
            (F(-1, 8), F(9, 8)),
        )
    )
    assert min_subcover_cardinality(C) == 1 == brute_min(C.to_joined())


def test_not_a_cover():
    with pytest.raises(NotACover):
        Cover(((F(-1, 8), F(1, 2)), (F(1, 2), F(9, 8))))
    with pytest.raises(NotACover):
        Cover(())
    with pytest.raises(NotACover):
        JoinedCover([IntervalSet.open(0, F(1, 2))])


def test_subcover_matches_brute_force():
    rng = random.Random(17)
    for _ in range(150):
        C = random_cover(rng, rng.randint(1, 7))
        J = C.to_joined()
        r = min_subcover(J)
        assert r.exact and r.size == brute_min(J)


def test_large_cover_stays_exact():
    # chain of 40 overlapping cells plus redundant long ones
    elems = [(F(i, 40) - F(1, 160), F(i + 1, 40) + F(1, 160)) for i in range(40)]
    elems += [(F(i, 40), F(i + 3, 40)) for i in range(0, 37, 2)]
    r = min_subcover(Cover(tuple(elems)).to_joined())
    assert r.exact
    assert r.size <= 40


def test_join_laws():
    rng = random.Random(23)
    for _ in range(60):
        C1 = random_cover(rng, rng.randint(1, 5)).to_joined()
        C2 = random_cover(rng, rng.randint(1, 5)).to_joined()
        J = join(C1, C2)
        assert IntervalSet.union_all(J.elements) == IntervalSet.unit()
        assert len(J) <= len(C1) * len(C2)
        n1, n2, nj = brute_min(C1), brute_min(C2), brute_min(J)
        assert min_subcover_cardinality(J) == nj
        assert max(n1, n2) <= nj <= n1 * n2


def test_join_with_trivial_cover():
    C = mesh_cover(4).to_joined()
    J = join(C, JoinedCover([IntervalSet.unit()]))
    assert set(J.elements) == set(C.elements)


def test_refinement_by_splitting():
    rng = random.Random(29)
    for _ in range(60):
        alpha = random_cover(rng, rng.randint(1, 5))
        beta = []
        for lo, hi in alpha.elements:
            cut = lo + (hi - lo) * F(rng.randint(1, 7), 8)
            pad = (hi - lo) / 16
            beta += [(lo, min(hi, cut + pad)), (max(lo, cut - pad), hi)]
        beta = Cover(tuple(beta))
        assert min_subcover_cardinality(alpha) <= min_subcover_cardinality(beta)


def test_pullback_examples():
    C = Cover(((F(-1, 8), F(5, 8)), (F(3, 8), F(9, 8))))
    assert pullback(IDENT, 5, C).elements == tuple(C.clipped())
    P = pullback(TENT, 1, C)
    assert P.elements[0] == IntervalSet([(0, F(5, 16), False, True), (F(11, 16), 1, True, False)])
    assert P.elements[1] == IntervalSet.open(F(3, 16), F(13, 16))
    # membership spot check against the map itself
    rng = random.Random(1)
    for _ in range(200):
        x = F(rng.randint(0, 480), 480)
        for (lo, hi), e in zip(C.elements, P.elements):
            assert (x in e) == (lo < evaluate(PLMap.tent(), x) < hi)
    with pytest.raises(UnsupportedComposition):
        pullback(load_builtin("ex1").family, 1, C)


def test_identity_entropy_is_zero():
    c = cover_entropy(IDENT, mesh_cover(4), 6)
    assert len({t.count for t in c.per_k}) == 1
    assert c.increment_est == 0
    assert lap_entropy(IDENT, 6).limsup_est == 0
    cmp = compare_family_vs_composition(IDENT, 6)
    assert cmp.gap == 0 and cmp.inequality_holds


def test_tent_estimates():
    lap = lap_entropy(TENT, 15)
    assert [t.count for t in lap.per_k] == [2**k for k in range(1, 16)]
    assert all(abs(t.rate - math.log(2)) < 1e-12 for t in lap.per_k)
    c = cover_entropy(TENT, Cover(((F(-1, 8), F(9, 16)), (F(7, 16), F(9, 8)))), 10)
    assert 0.5 <= c.liminf_est <= c.limsup_est <= 0.8
    assert c.exact


def test_ex9_lap_growth():
    lap = lap_entropy(load_builtin("ex9").family, 12)
    counts = [t.count for t in lap.per_k]
    assert counts == sorted(counts) and counts[-1] > counts[0] * 100
    assert lap.liminf_est > 0.5


def test_ladder_is_monotone_for_tent():
    ladder = mesh_ladder(TENT, 8, (2, 4))
    runs = ladder["per_mesh"]
    assert runs[2].limsup_est <= runs[4].limsup_est == ladder["best_limsup"]


def test_compare_on_ex2():
    cmp = compare_family_vs_composition(load_builtin("ex2").family, 10, cover=mesh_cover(2))
    assert cmp.inequality_holds and cmp.lap_identity and cmp.cover_refinement


def test_compare_on_random_families():
    rng = random.Random(2024)
    for _ in range(20):
        fam = random_family(rng, 2, max_pieces=4)
        cmp = compare_family_vs_composition(fam, 10)
        assert cmp.inequality_holds and cmp.lap_identity


def test_cover_entropy_below_lap_entropy():
    rng = random.Random(4)
    for _ in range(30):
        fam = random_family(rng, rng.randint(1, 3), max_pieces=3)
        lap = lap_entropy(fam, 8)
        for C in (mesh_cover(2), mesh_cover(4)):
            assert cover_entropy(fam, C, 8).increment_est <= lap.limsup_est + 0.05


def test_estimate_serializes_exact_counts():
    js = cover_entropy(TENT, mesh_cover(2), 4).to_json()
    oracle = [brute_min(J) for _, J in joined_covers(TENT, mesh_cover(2), 4)]
    assert [t["count"] for t in js["per_k"]] == oracle == [2, 4, 7, 12]
    assert js["limsup_est_log2"] == pytest.approx(js["limsup_est"] / math.log(2), rel=1e-9)
