import random
from fractions import Fraction as F

import pytest

from nadyn.analysis import (
    MeshParams,
    Status,
    check_dense_periodicity,
    check_minimality,
    check_sensitivity,
    check_topological_mixing,
    check_transitivity,
    check_weak_mixing,
    find_invariant_trap,
    find_scrambled_pairs,
    period3_cycles,
    replay_transitivity_through_family,
)
from nadyn.cli import load_builtin
from nadyn.engine import Family, FamilyHit, image_at, omega, reduce_to_autonomous
from nadyn.errors import UnsupportedSpace
from nadyn.exact import QAlpha
from nadyn.intervals import IntervalSet, mesh_cells
from nadyn.plmap import PLMap, image, iterate
from nadyn.spaces import CirclePoint, distance_to_unit, CylPoint, ShiftMap, ShiftPoint

from randfam import random_family


def fam(name):
    return load_builtin(name).family


def g_of(name):
    return Family.autonomous(reduce_to_autonomous(fam(name)).g)


IDENT = Family.autonomous(PLMap.identity())
TENT = Family.autonomous(PLMap.tent())
P = MeshParams(m=16, N=64)


def test_mesh_params_defaults_and_validation():
    p = MeshParams(m=8, N=40)
    assert (p.eps, p.eps_prime, p.tail) == (F(1, 32), F(1, 512), 20)
    for bad in (dict(m=1), dict(N=0), dict(eps=F(0)), dict(eps=F(1)), dict(N=4, tail=5)):
        with pytest.raises(ValueError):
            MeshParams(**bad)


# transitivity ------------------------------------------------------------


def test_ex2_composition_transitive_at_scale():
    assert check_transitivity(g_of("ex2"), P).status is Status.VERIFIED
    assert check_transitivity(fam("ex2"), P).status is Status.VERIFIED


def test_identity_not_transitive():
    v = check_transitivity(IDENT, P)
    assert v.status is Status.CERTIFIED_FALSE
    assert v.witness["kind"] == "identity-collapse"
    assert not v.witness["U"].intersects(v.witness["V"])


def test_ex9_asymmetry():
    vg = check_transitivity(g_of("ex9"), P)
    assert vg.status is Status.CERTIFIED_FALSE
    assert vg.witness["trap"] == IntervalSet.closed(F(1, 2), 1)
    assert check_transitivity(fam("ex9"), P).status is Status.VERIFIED


def test_members_of_ex2_trapped():
    f1, f2 = fam("ex2").maps
    assert find_invariant_trap(f1) == IntervalSet.closed(F(1, 2), 1)
    assert find_invariant_trap(f2) == IntervalSet.closed(0, F(1, 2))


def test_trap_examples():
    assert find_invariant_trap(reduce_to_autonomous(fam("ex9")).g) == IntervalSet.closed(F(1, 2), 1)
    assert find_invariant_trap(reduce_to_autonomous(fam("half-trap")).g) == IntervalSet.closed(0, F(1, 2))
    assert find_invariant_trap(PLMap.tent()) is None


def test_shift_transitivity():
    assert check_transitivity(Family.autonomous(ShiftMap(1)), MeshParams(m=4, N=16)).status is Status.VERIFIED
    v = check_transitivity(fam("ex1"), MeshParams(m=4, N=16))
    assert v.status is Status.CERTIFIED_FALSE and v.witness["omega_identity_index"] == 2


def test_certified_false_witnesses_reverify():
    members = [Family.autonomous(f) for f in fam("ex2").maps]
    for F_ in (g_of("ex9"), g_of("half-trap"), *members, IDENT, fam("ex1")):
        v = check_transitivity(F_, MeshParams(m=4, N=16))
        assert v.status is Status.CERTIFIED_FALSE
        w = v.witness
        if w["kind"] == "invariant-trap":
            g = reduce_to_autonomous(F_).g
            assert image(g, w["trap"]) <= w["trap"]
            # every image of U stays inside the orbit union
            for n in range(1, 9):
                assert not image_at(F_, w["U"], n).intersects(w["V"])
        else:
            assert omega(F_, w["omega_identity_index"]).is_identity()


def test_transitivity_witness_replay():
    for name in ("ex2", "ex6"):
        F_ = fam(name)
        hits = replay_transitivity_through_family(F_, MeshParams(m=8, N=32))
        assert len(hits) == 64
        for h in hits:
            assert isinstance(h, FamilyHit) and h.index % 2 == 0
            assert image_at(F_, h.U, h.index).intersects(h.V)


# mixing -------------------------------------------------------------------


def test_ex6_mixing_properties():
    F6 = fam("ex6")
    assert check_transitivity(F6, P).status is Status.VERIFIED
    wm = check_weak_mixing(F6, p=P)
    assert wm.status is Status.VERIFIED
    # some index sends each cell exactly onto [0, 1]
    assert all(idx for idx in wm.witness["full_indices"])
    assert check_topological_mixing(F6, P).status is Status.VERIFIED


def test_half_trap_odd_indices_cover():
    v = check_weak_mixing(fam("half-trap"), p=P)
    assert v.status is Status.VERIFIED
    for idx in v.witness["full_indices"]:
        assert idx and all(n % 2 == 1 for n in idx)
    # even times stay in the trap half for cells inside [0, 1/2]
    U = mesh_cells(16)[2]
    for n in range(2, 20, 2):
        assert image_at(fam("half-trap"), U, n) <= IntervalSet.closed(0, F(1, 2))


def test_identity_mixing_fails():
    assert check_weak_mixing(IDENT, p=P).status is Status.CERTIFIED_FALSE
    assert check_topological_mixing(IDENT, P).status is Status.CERTIFIED_FALSE
    assert check_topological_mixing(fam("ex1"), MeshParams(m=4, N=16)).status is Status.CERTIFIED_FALSE


def test_weak_mixing_with_given_sets():
    sets = [IntervalSet.open(0, F(1, 100)), IntervalSet.open(F(1, 2), F(51, 100))]
    v = check_weak_mixing(TENT, sets, P)
    assert v.status is Status.VERIFIED
    n = v.witness["first_simultaneous_index"]
    assert all(distance_to_unit(image_at(TENT, U, n)) < P.eps for U in sets)
    assert all(distance_to_unit(image_at(TENT, U, n - 1)) >= P.eps for U in sets[:1])


def test_mixing_transfer_from_composition():
    rng = random.Random(1)
    families = [fam("ex6"), fam("ex2")] + [random_family(rng, rng.randint(1, 3), surjective=True) for _ in range(30)]
    checked = 0
    for F_ in families:
        n = F_.period
        g = Family.autonomous(reduce_to_autonomous(F_).g)
        pg = MeshParams(m=8, N=12)
        v = check_topological_mixing(g, pg)
        if v.status is not Status.VERIFIED:
            continue
        pf = MeshParams(m=8, N=n * pg.N + n, eps=2 * pg.eps, tail=n * pg.tail)
        w = check_topological_mixing(F_, pf)
        assert w.status is Status.VERIFIED
        assert w.witness["max_K"] <= n * v.witness["max_K"] + n
        checked += 1
    assert checked >= 5


def test_monotone_in_horizon_and_mesh():
    for F_ in (fam("ex2"), fam("ex6"), TENT, fam("ex9")):
        for check in (check_transitivity, check_topological_mixing):
            base = check(F_, MeshParams(m=8, N=32))
            if base.status is Status.VERIFIED:
                assert check(F_, MeshParams(m=8, N=64)).status is Status.VERIFIED
                assert check(F_, MeshParams(m=4, N=32)).status is Status.VERIFIED
        base = check_weak_mixing(F_, p=MeshParams(m=8, N=32))
        if base.status is Status.VERIFIED:
            assert check_weak_mixing(F_, p=MeshParams(m=8, N=64)).status is Status.VERIFIED


def test_unsupported_spaces():
    with pytest.raises(UnsupportedSpace):
        check_transitivity(fam("ex4"), P)
    with pytest.raises(UnsupportedSpace):
        check_weak_mixing(fam("ex7"), p=P)
    with pytest.raises(UnsupportedSpace):
        check_sensitivity(fam("ex1"), P)
    irr = Family.cyclic([fam("ex4").maps[0]])
    with pytest.raises(UnsupportedSpace):
        check_minimality(irr, [CirclePoint(F(0))], MeshParams(m=4, N=8))


# periodicity and minimality -----------------------------------------------


def test_dense_periodicity_examples():
    v = check_dense_periodicity(fam("ex4"), P)
    assert v.status is Status.CERTIFIED_TRUE and v.witness["period"] == 2
    v = check_dense_periodicity(fam("ex3"), P, period_cap=10_000)
    assert v.status is Status.REFUTED
    v = check_dense_periodicity(TENT, MeshParams(m=8, N=64), period_cap=6)
    assert v.status is Status.VERIFIED
    assert v.witness["periodic_points_found"] >= 8


def test_minimality_examples():
    v = check_minimality(fam("ex5"), [F(0), F(1, 2), F(5, 7)], MeshParams(m=16, N=140_000))
    assert v.status is Status.VERIFIED and v.label == "dense-orbit check"
    assert check_minimality(IDENT, [F(1, 3)], P).status is Status.REFUTED
    v = check_minimality(fam("ex4"), [CirclePoint(F(1, 5))], P)
    assert v.status is Status.REFUTED
    assert v.witness["samples"][0]["distinct_orbit_points"] == 2


# sensitivity ---------------------------------------------------------------


def test_sensitivity_examples():
    assert check_sensitivity(fam("ex7"), P).status is Status.CERTIFIED_FALSE
    assert check_sensitivity(IDENT, P).status is Status.CERTIFIED_FALSE
    v = check_sensitivity(TENT, MeshParams(m=16, N=20), F(1, 2))
    assert v.status is Status.VERIFIED and v.witness["cofinite"]
    single = Family.cyclic([fam("ex7").maps[0]])
    assert check_sensitivity(single, P, F(1, 4)).status is Status.VERIFIED


# Li-Yorke ------------------------------------------------------------------


def test_ex8_period_three_certificate():
    r = find_scrambled_pairs(fam("ex8"), p=P)
    assert r.li_yorke
    assert [F(1, 9), F(7, 9), F(5, 9)] in r.period3_cycles
    assert all(w["omega_index"] == 6 for w in r.family_witnesses)


def test_period3_cycles_of_tent():
    cycles = period3_cycles(PLMap.tent())
    assert sorted(map(tuple, cycles)) == [(F(2, 9), F(4, 9), F(8, 9)), (F(2, 7), F(4, 7), F(6, 7))]
    g3 = iterate(PLMap.tent(), 3)
    for cyc in cycles:
        assert all(g3(x) == x for x in cyc)


def test_identity_has_no_scrambled_pairs():
    r = find_scrambled_pairs(IDENT, [F(0), F(1, 3), F(1, 2)], P)
    assert not r.scrambled_pairs and not r.li_yorke
    assert all(x.limsup_est == x.liminf_est for x in r.pairs)


def test_ex1_pairs_refuted_exactly():
    pts = [ShiftPoint("0"), ShiftPoint("01"), ShiftPoint("0011", 1), ShiftPoint("001")]
    r = find_scrambled_pairs(fam("ex1"), pts, P)
    assert r.pairs and all(x.exact for x in r.pairs)
    assert not r.scrambled_pairs
    assert all(x.liminf_est > 0 for x in r.pairs)


def test_tent_has_scrambled_candidates():
    r = find_scrambled_pairs(TENT, p=MeshParams(m=16, N=64))
    assert r.li_yorke
