import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from growthlab import words as W
from growthlab.errors import BudgetExceeded, StrategyMismatch, Unexplored
from growthlab.spaces import (ProductSpace, build_automaton, cached_space, cayley_space, census,
                              convolve_spheres, counts_csv, load_ball, lp_combine, quotient_space,
                              save_ball)

from oracles import free_product_spheres, free_spheres, torsion_quotient_spheres


def ids(space, *words):
    return [space.intern(w) for w in words]


# -- exploration ------------------------------------------------------------

def test_free_group_ball_counts(f2):
    assert cayley_space(f2, 2).ball_counts() == [1, 5, 17]


def test_order_two_quotient_counts():
    assert cayley_space(W.one_relator(["aa"]), 2).ball_counts() == [1, 4, 10]


def test_radius_zero(f2, a3):
    assert cayley_space(f2, 0).ball_counts() == [1]
    assert cayley_space(a3, 0).ball_counts() == [1]


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_free_sphere_formula(rank):
    radius = {1: 12, 2: 12, 3: 7}[rank]
    space = cayley_space(W.free_group(rank), radius)
    assert space.sphere_counts() == free_spheres(rank, radius)
    k = 2 * rank
    if k > 2:
        assert space.ball_counts()[-1] == 1 + k * ((k - 1) ** radius - 1) // (k - 2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_free_product_counts_match_oracle(n):
    p = W.one_relator([W.power((1,), n)])
    assert cayley_space(p, 9).sphere_counts() == free_product_spheres([n, 0], 9)
    assert census(p, 30) == free_product_spheres([n, 0], 30)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_small_cancellation_counts_match_oracle(n):
    p = W.one_relator([W.power((1, 2), n)])
    expected = torsion_quotient_spheres(n, 9)
    assert cayley_space(p, 9).sphere_counts() == expected
    assert census(p, 9) == expected


def test_quotient_space_examples(f2):
    assert quotient_space(f2, ["aaa"], 2).ball_counts() == [1, 5, 15]
    assert quotient_space(f2, [], 3).ball_counts() == cayley_space(f2, 3).ball_counts()
    assert quotient_space(f2, ["a"], 1).ball_counts() == [1, 3]


def test_quotient_space_rejects_unsupported(f2):
    with pytest.raises(StrategyMismatch):
        quotient_space(f2, ["abAB"], 2)


def test_direct_product_counts_match_convolution(f2, f2xf2):
    space = cayley_space(f2xf2, 5)
    f = census(f2, 5)
    assert space.sphere_counts() == convolve_spheres([f, f], 5)
    assert space.sphere_counts()[:4] == [1, 8, 40, 168]


def test_ids_are_shortlex_ordered(a3):
    space = cayley_space(a3, 4)
    for n in range(5):
        ws = [space.word(i) for i in space.sphere(n)]
        assert ws == sorted(ws, key=W.shortlex_key)
        assert all(len(w) == n for w in ws)
    assert [W.format_word(space.word(i)) for i in space.sphere(1)] == ["a", "A", "b", "B"]


def test_explore_is_deterministic_and_incremental(ab6):
    a = cayley_space(ab6, 6)
    b = cayley_space(ab6, 3).explore(6)
    assert np.array_equal(a.parent, b.parent) and np.array_equal(a.letter, b.letter)


def test_budget_keeps_complete_layers(f2):
    with pytest.raises(BudgetExceeded) as e:
        cayley_space(f2, 10, budget=200)
    # ball(4) = 161 fits in the budget, ball(5) = 485 does not
    assert e.value.partial_radius == 4


@pytest.mark.parametrize("pres", ["a3", "ab6", "f2xf2"])
def test_automaton_accepts_exactly_canonical_words(pres, request):
    p = request.getfixturevalue(pres)
    aut = build_automaton(p)
    letters = p.letters
    for n in range(4):
        for w in itertools.product(letters, repeat=n):
            assert aut.accepts(w) == (W.canonical_form(w, p) == w)


# -- metric -----------------------------------------------------------------

def test_distance_examples(f2, a3):
    space = cayley_space(f2, 3)
    a, ab = ids(space, "a", "ab")
    assert space.distance(a, a) == 0
    assert space.distance(a, ab) == 1
    q = cayley_space(a3, 2)
    x, y = ids(q, "a", "A")
    assert q.distance(x, y) == 1


def test_geodesic_examples(f2):
    space = cayley_space(f2, 3)
    o, a, ab, b = 0, *ids(space, "a", "ab", "b")
    assert space.geodesic(o, ab) == [o, a, ab]
    assert space.geodesic(a, b) == [a, o, b]


def test_unknown_ids_raise(f2):
    space = cayley_space(f2, 2)
    with pytest.raises(Unexplored):
        space.word(10 ** 6)
    with pytest.raises(Unexplored):
        space.ball(3)


@given(st.data())
def test_distance_is_a_metric(data):
    for p in (W.one_relator(["aaa"]), W.one_relator(["ab" * 6])):
        space = _SPACES.setdefault(p, cayley_space(p, 4))
        pick = st.integers(0, space.size - 1)
        x, y, z = data.draw(pick), data.draw(pick), data.draw(pick)
        assert space.distance(x, x) == 0
        assert space.distance(x, y) == space.distance(y, x)
        assert space.distance(x, z) <= space.distance(x, y) + space.distance(y, z)
        assert space.distance(0, x) == space.length(x)


_SPACES: dict = {}


def test_free_distance_matrix_agrees_with_distance(f2):
    space = cayley_space(f2, 4)
    xs = list(range(0, space.size, 7))
    ys = list(range(3, space.size, 11))
    D = space.distance_matrix(xs, ys)
    assert all(D[i, j] == space.distance(x, y) for i, x in enumerate(xs) for j, y in enumerate(ys))


def test_geodesics_have_unit_steps(ab6):
    space = cayley_space(ab6, 5)
    for x, y in [(0, 200), (17, 311), (5, 5)]:
        path = space.geodesic(x, y)
        assert len(path) - 1 == space.distance(x, y)
        assert all(space.distance(u, v) == 1 for u, v in zip(path, path[1:]))


def test_quotient_domination(f2, a3, ab6):
    free = cayley_space(f2, 7).ball_counts()
    for p in (a3, ab6):
        assert all(q <= f for q, f in zip(cayley_space(p, 7).ball_counts(), free))


def test_balls_around_translated_basepoint_have_equal_size(ab6):
    # the ball around g o is the translate of the ball around o
    space = cayley_space(ab6, 6)
    g = space.intern("ab")
    inner = [sum(1 for x in space.ball(5) if space.distance(g, x) <= r) for r in range(1, 4)]
    assert inner == space.ball_counts()[1:4]


# -- products ---------------------------------------------------------------

def test_product_distance_examples(f2):
    space = cayley_space(f2, 2)
    a, b = ids(space, "a", "b")
    for p, expected in [(1, 2), (math.inf, 1), (2, math.sqrt(2))]:
        assert ProductSpace([space, space], p).distance((0, 0), (a, b)) == pytest.approx(expected)


def test_product_geodesic_moves_one_factor_at_a_time(f2):
    space = cayley_space(f2, 2)
    a, b = ids(space, "a", "b")
    path = ProductSpace([space, space], 1).geodesic((0, 0), (a, b))
    assert path == [(0, 0), (a, 0), (a, b)]


def test_product_ball_identities(f2):
    s = census(f2, 8)
    balls = list(itertools.accumulate(s))
    assert ProductSpace([s, s], 1).ball_counts() == list(itertools.accumulate(convolve_spheres([s, s], 8)))
    assert ProductSpace([s, s], math.inf).ball_counts() == [b * b for b in balls]


def test_general_p_ball_counts_brute_force(f2):
    s = census(f2, 6)
    for p in (2, 3, 1.5):
        counts = ProductSpace([s, s], p).ball_counts()
        for n in range(7):
            brute = sum(s[i] * s[j] for i in range(7) for j in range(7)
                        if lp_combine([i, j], p) <= n + 1e-12)
            assert counts[n] == brute


def test_counts_csv_columns(f2):
    text = counts_csv(cayley_space(f2, 2))
    assert text.splitlines() == ["n,sphere,ball", "0,1,1", "1,4,5", "2,12,17"]


def test_ball_cache_round_trip(tmp_path, ab6):
    space = cayley_space(ab6, 5)
    d = save_ball(space, tmp_path / "c")
    back = load_ball(d, ab6)
    assert back.ball_counts() == space.ball_counts()
    assert back.word(123) == space.word(123)
    again = cached_space(ab6, 5, tmp_path)
    assert cached_space(ab6, 5, tmp_path).ball_counts() == again.ball_counts()
