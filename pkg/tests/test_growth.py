import itertools
import json
import math

import pytest
from hypothesis import given, strategies as st

from growthlab import words as W
from growthlab.errors import DegenerateGrowth, InsufficientData, Unexplored
from growthlab.growth import (annulus, berlekamp_massey, exact_free_product_rate,
                              exponential_constant_range, fekete_bound, find_recurrence,
                              growth_rate, lq_norm_rate, separated_net)
from growthlab.spaces import cayley_space, census

from oracles import free_product_spheres, rate_from_spheres

LOG3 = math.log(3)

# Growth rates of Z_n * Z, from sphere ratios of the syllable-count oracle at
# radius 600 (exact integers); the first two also equal log 2 and log 3.
FREE_PRODUCT_RATES = {
    2: 0.6931471805599453,
    3: 0.9406136421072088,
    4: 1.005052538742381,
    5: 1.0560978190260222,
    6: 1.0714601723049326,
    7: 1.085562877281129,
    8: 1.0900588939777862,
    9: 1.0944051665620815,
    10: 1.095826445611281,
    11: 1.0972286328547334,
    12: 1.097692309018041,
}


def balls(spheres):
    return list(itertools.accumulate(spheres))


# -- estimators -------------------------------------------------------------

def test_free_group_exact_recurrence():
    spheres = [1] + [4 * 3 ** (n - 1) for n in range(1, 13)]
    rep = growth_rate(balls(spheres), "exact-recurrence")
    assert abs(rep.delta - LOG3) < 1e-9
    # s(n) = 3 s(n-1), with one extra slot because s(1) = 4 s(0)
    assert rep.diagnostics["recurrence"] == [3, 0]


def test_constant_counts_give_zero():
    assert growth_rate([5] * 10, "tail-slope").delta == pytest.approx(0, abs=1e-12)
    assert growth_rate([5] * 10, "auto").delta == pytest.approx(0, abs=1e-12)


def test_synthetic_exponential_slope():
    counts = [math.exp(2 * n) for n in range(20)]
    assert growth_rate(counts, "tail-slope").delta == pytest.approx(2.0, abs=0.01)
    assert growth_rate(counts, "ratio").delta == pytest.approx(2.0, abs=0.01)


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        growth_rate([1, 5, 17])
    with pytest.raises(InsufficientData):
        growth_rate([1, 0, 3, 4])
    with pytest.raises(InsufficientData):
        growth_rate([1, 2, 4, 7, 12], "exact-recurrence")


def test_report_serialization():
    rep = growth_rate(balls([1] + [4 * 3 ** (n - 1) for n in range(1, 9)]), "tail-slope")
    data = json.loads(json.dumps(rep.to_json()))
    assert set(data) >= {"counts", "delta", "method", "window", "oracle", "residuals"}
    lines = rep.plot_csv().splitlines()
    assert lines[0] == "n,log_N,fitted_line" and len(lines) == 10


def test_fekete_bound_is_an_upper_bound():
    b = census(W.free_group(2), 10)
    bb = balls(b)
    assert fekete_bound(bb) >= LOG3 - 1e-12


def test_berlekamp_massey_finds_fibonacci():
    fib = [1, 1]
    for _ in range(12):
        fib.append(fib[-1] + fib[-2])
    assert [int(c) for c in berlekamp_massey(fib)] == [1, 1]
    assert find_recurrence(fib) == [1, 1]
    assert find_recurrence(fib[:4]) is None


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=3),
       st.lists(st.integers(1, 9), min_size=3, max_size=3))
def test_recurrence_recovery_property(coeffs, seed):
    seq = list(seed[: len(coeffs)])
    while len(seq) < 2 * len(coeffs) + 6:
        seq.append(sum(c * seq[-1 - i] for i, c in enumerate(coeffs)))
    rec = berlekamp_massey(seq)
    # the recovered recurrence reproduces the sequence
    L = len(rec)
    for n in range(L, len(seq)):
        assert sum(rec[i] * seq[n - 1 - i] for i in range(L)) == seq[n]


# -- exact series oracle -----------------------------------------------------

@pytest.mark.parametrize("n", sorted(FREE_PRODUCT_RATES))
def test_free_product_rate_frozen_values(n):
    assert exact_free_product_rate([n, 0]) == pytest.approx(FREE_PRODUCT_RATES[n], abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_free_product_rate_against_count_oracle(n):
    assert exact_free_product_rate([n, 0]) == pytest.approx(
        rate_from_spheres(free_product_spheres([n, 0], 400)), abs=1e-9)


def test_free_product_rate_examples():
    assert exact_free_product_rate([2, 0]) == pytest.approx(math.log(2), abs=1e-12)
    assert exact_free_product_rate([0, 0]) == pytest.approx(LOG3, abs=1e-12)
    assert exact_free_product_rate([2, 3]) == pytest.approx(math.log(math.sqrt(2)), abs=1e-9)
    dihedral = exact_free_product_rate([2, 2])
    assert dihedral == 0 and dihedral.degenerate
    with pytest.raises(DegenerateGrowth):
        exact_free_product_rate([2, 2], strict=True)
    with pytest.raises(ValueError):
        exact_free_product_rate([3])


def test_free_product_rates_increase_to_log3():
    rates = [exact_free_product_rate([n, 0]) for n in range(2, 13)]
    assert all(a < b for a, b in zip(rates, rates[1:]))
    assert all(r < LOG3 for r in rates)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_recurrence_on_census_matches_series(n):
    p = W.one_relator([W.power((1,), n)])
    rep = growth_rate(balls(census(p, 40)), "auto")
    assert rep.method == "exact-recurrence"
    assert rep.delta == pytest.approx(exact_free_product_rate([n, 0]), abs=1e-9)


def test_quotient_rate_below_free_rate():
    free = growth_rate(balls(census(W.free_group(2), 12)), "tail-slope").delta
    for rel in ["aaa", "ab" * 6]:
        q = growth_rate(balls(census(W.one_relator([rel]), 12)), "tail-slope").delta
        assert q <= free


# -- L^q norm ---------------------------------------------------------------

def test_lq_norm_examples():
    assert lq_norm_rate([LOG3, LOG3], 1) == pytest.approx(LOG3)
    assert lq_norm_rate([LOG3, LOG3], math.inf) == pytest.approx(2 * LOG3)
    assert lq_norm_rate([3, 4], 2) == pytest.approx(5)
    for p in (1, 1.5, 2, 3, math.inf):
        assert lq_norm_rate([0.7, 0], p) == pytest.approx(0.7)


@given(st.lists(st.floats(0, 5), min_size=2, max_size=3), st.sampled_from([1, 1.5, 2, 4, math.inf]),
       st.floats(0, 1))
def test_lq_norm_is_monotone(ds, p, bump):
    up = list(ds)
    up[0] += bump
    assert lq_norm_rate(up, p) >= lq_norm_rate(ds, p) - 1e-12


# -- annuli and nets --------------------------------------------------------

def test_annulus_examples(f2_space):
    assert len(annulus(f2_space, 1, 0)) == 4
    assert len(annulus(f2_space, 2, 1)) == 4 + 12 + 36
    assert annulus(f2_space, 0, 0).ids == (0,)
    with pytest.raises(Unexplored):
        annulus(f2_space, 6, 1)


def test_annulus_membership_is_exact(ab6):
    space = cayley_space(ab6, 6)
    A = set(annulus(space, 3, 1).ids)
    assert A == {x for x in space.ball(6) if abs(space.length(x) - 3) <= 1}


def test_separated_net_examples(f2_space):
    s1 = list(f2_space.sphere(1))
    assert separated_net(f2_space, s1, 1) == tuple(s1)
    ball = list(f2_space.ball(2))
    assert separated_net(f2_space, ball, 0) == tuple(ball)
    assert separated_net(f2_space, [7], 5) == (7,)


@pytest.mark.parametrize("C", [1, 2, 3, 4])
def test_separated_net_is_separated_and_maximal(f2_space, C):
    pts = list(annulus(f2_space, 4, 1).ids)
    net = separated_net(f2_space, pts, C)
    D = f2_space.distance_matrix(net, net)
    assert all(D[i, j] > C for i in range(len(net)) for j in range(len(net)) if i != j)
    Dx = f2_space.distance_matrix(pts, net)
    assert (Dx.min(axis=1) <= C).all()


def test_exponential_constant_range_for_free_group():
    b = balls(census(W.free_group(2), 20))
    lo, hi = exponential_constant_range(b, LOG3)
    # N(r) = 2 * 3^r - 1, so N(r) / 3^r lies in [5/3, 2)
    assert lo == pytest.approx(5 / 3) and hi < 2
