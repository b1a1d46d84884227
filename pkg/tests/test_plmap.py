import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nadyn.errors import OutOfDomain, ValidationError
from nadyn.intervals import IntervalSet
from nadyn.plmap import (
    PLMap,
    compose,
    evaluate,
    image,
    iterate,
    lap_count,
    preimage,
    solve_fixed_points,
)

from randfam import interval_sets, plmaps

H, Q, T = F(1, 2), F(1, 4), F(3, 4)


def P(*pts):
    return PLMap.from_points([(F(x), F(y)) for x, y in pts])


EX2_F1 = P((0, 0), (H, 1), (1, H))
EX2_F2 = P((0, H), (H, 0), (1, 1))
EX9_F1 = P((0, H), (Q, 1), (T, 0), (1, H))
EX9_F2 = P((0, H), (H, 1), (T, 0), (1, H))


def ex2_composed_by_hand(x):
    # branches of f2(f1(x)) worked out separately for each range of x
    if x <= Q:
        return H - 2 * x
    if x <= H:
        return 4 * x - 1
    return 2 - 2 * x


def test_evaluate_examples():
    assert evaluate(EX9_F1, Q) == 1
    assert evaluate(PLMap.identity(), F(3, 7)) == F(3, 7)
    assert evaluate(compose(EX2_F2, EX2_F1), F(3, 8)) == H


def test_evaluate_outside_domain():
    with pytest.raises(OutOfDomain):
        evaluate(PLMap.tent(), F(5, 4))


def test_validation_invariants():
    with pytest.raises(ValidationError) as e:
        P((0, 0), (H, F(7, 6)), (1, 0))
    assert e.value.invariant == "range"
    with pytest.raises(ValidationError):
        PLMap([F(0), F(1, 2)], [F(0), F(1)])
    with pytest.raises(ValidationError) as e:
        PLMap.from_pieces([F(0), H, F(1)], [(F(1), F(0)), (F(1), F(1, 4))])
    assert e.value.invariant == "continuity"


def test_ex2_composition_matches_hand_formula():
    g = compose(EX2_F2, EX2_F1)
    by_hand = PLMap.from_pieces([F(0), Q, H, F(1)], [(F(-2), H), (F(4), F(-1)), (F(-2), F(2))])
    assert g == by_hand
    for k in range(65):
        x = F(k, 64)
        assert evaluate(g, x) == ex2_composed_by_hand(x)
    assert lap_count(g) == 3


def test_canonical_form_merges_collinear_nodes():
    assert P((0, 0), (H, H), (1, 1)) == PLMap.identity()


def test_ex9_invariant_half():
    g = compose(EX9_F2, EX9_F1)
    A = IntervalSet.closed(H, 1)
    assert image(g, A) == A


def test_tent_image_and_preimage():
    T_ = PLMap.tent()
    assert image(T_, IntervalSet.open(F(2, 5), F(3, 5))) == IntervalSet([(F(4, 5), F(1), True, False)])
    assert preimage(T_, IntervalSet.point(1)) == IntervalSet.point(H)
    assert preimage(T_, IntervalSet([(H, F(1), True, False)])) == IntervalSet.open(Q, T)


def test_tent_image_against_sampling_oracle():
    rng = random.Random(5)
    A = IntervalSet.open(F(2, 5), F(3, 5))
    vals = [evaluate(PLMap.tent(), x) for x in A.sample(rng, 10_000)]
    assert all(F(4, 5) < v <= 1 for v in vals)
    assert min(vals) < F(4, 5) + F(1, 100)
    # endpoint analysis: the fold 1/2 lies inside A and reaches 1, both ends of A map to 4/5
    assert evaluate(PLMap.tent(), H) == 1
    assert evaluate(PLMap.tent(), F(2, 5)) == evaluate(PLMap.tent(), F(3, 5)) == F(4, 5)


def test_tent_preimage_against_membership_oracle():
    rng = random.Random(6)
    A = IntervalSet([(H, F(1), True, False)])
    pre = preimage(PLMap.tent(), A)
    for x in IntervalSet.unit().sample(rng, 1000):
        assert (x in pre) == (evaluate(PLMap.tent(), x) in A)


def test_identity_laws():
    A = IntervalSet([(0, Q, False, True), (H, T, True, False)])
    assert image(PLMap.identity(), A) == A
    assert preimage(PLMap.identity(), A) == A
    assert lap_count(PLMap.identity()) == 1
    assert lap_count(PLMap.tent()) == 2


def test_fixed_points():
    assert solve_fixed_points(PLMap.identity()) == [IntervalSet.unit()]
    assert solve_fixed_points(PLMap.tent()) == [F(0), F(2, 3)]
    assert solve_fixed_points(PLMap.constant(F(1, 3))) == [F(1, 3)]


def test_tent_iterate_fixed_point_count():
    for n in range(1, 8):
        pts = solve_fixed_points(iterate(PLMap.tent(), n))
        assert len(pts) == 2**n


def test_flat_piece_is_its_own_lap():
    f = P((0, 0), (Q, H), (T, H), (1, 0))
    assert lap_count(f) == 3
    assert image(f, IntervalSet.open(F(1, 3), F(2, 3))) == IntervalSet.point(H)


@given(plmaps())
def test_compose_identity_law(f):
    assert compose(PLMap.identity(), f) == f
    assert compose(f, PLMap.identity()) == f


@settings(max_examples=60)
@given(plmaps(), plmaps(), plmaps())
def test_compose_associative(f, g, h):
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)


@given(plmaps(), plmaps(), st.integers(0, 48))
def test_compose_pointwise(f, g, k):
    x = F(k, 48)
    assert evaluate(compose(g, f), x) == evaluate(g, evaluate(f, x))


@settings(max_examples=60)
@given(plmaps(), interval_sets(), st.randoms(use_true_random=False))
def test_image_contains_values(f, A, rng):
    B = image(f, A)
    for x in A.sample(rng, 100) + A.endpoints():
        if x in A:
            assert evaluate(f, x) in B


@settings(max_examples=60)
@given(plmaps(), interval_sets(), st.randoms(use_true_random=False))
def test_preimage_adjunction(f, A, rng):
    pre = preimage(f, A)
    pts = IntervalSet.unit().sample(rng, 100) + pre.endpoints() + A.endpoints()
    for x in pts:
        if 0 <= x <= 1:
            assert (x in pre) == (evaluate(f, x) in A)


@given(plmaps(), plmaps())
def test_lap_submultiplicative(f, g):
    assert lap_count(compose(g, f)) <= lap_count(f) * lap_count(g)


@given(plmaps(), interval_sets(), interval_sets())
def test_image_distributes_over_union(f, A, B):
    assert image(f, A | B) == image(f, A) | image(f, B)


@given(plmaps())
def test_fixed_points_are_sound(f):
    for item in solve_fixed_points(f):
        if isinstance(item, IntervalSet):
            assert f.is_identity_on(item)
        else:
            assert evaluate(f, item) == item


def test_lap_count_against_sampled_monotonicity():
    rng = random.Random(11)
    from randfam import random_plmap

    for _ in range(200):
        f = random_plmap(rng, 6, 12)
        xs = [F(k, 240) for k in range(241)]
        vals = [evaluate(f, x) for x in xs]
        signs = []
        for a, b in zip(vals, vals[1:]):
            s = (b > a) - (b < a)
            if not signs or s != signs[-1]:
                signs.append(s)
        assert lap_count(f) == len(signs)
