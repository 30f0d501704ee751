import math
import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from artifact.pbw import (SeriesError, TruncatedSeries, build_lemdom_profile, check_series_lemma,
                          convolve, enveloping_growth, euler_product, euler_product_schoolbook,
                          floor_n2_log2, qdim_estimate)
from oracles import partitions_dp


def test_partition_numbers():
    assert euler_product([1] * 10, 10).coeffs == (1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42)
    assert euler_product([1] * 100, 100).coeffs[100] == 190569292
    assert list(euler_product([1] * 200, 200).coeffs) == partitions_dp(200)


def test_binomial_series():
    for d in (1, 2, 5):
        a = euler_product([d], 12).coeffs
        assert list(a) == [comb(n + d - 1, d - 1) for n in range(13)]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=25))
def test_recurrence_matches_schoolbook(b):
    N = len(b)
    assert euler_product(b, N) == euler_product_schoolbook(b, N)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=12, max_size=12),
       st.lists(st.integers(0, 4), min_size=12, max_size=12))
def test_multiplicative_in_b(b1, b2):
    N = 12
    both = euler_product([x + y for x, y in zip(b1, b2)], N).coeffs
    assert list(both) == convolve(euler_product(b1, N).coeffs, euler_product(b2, N).coeffs, N)


def test_positive_and_monotone_when_b1():
    a = euler_product([1, 0, 3, 0, 0, 2], 30).coeffs
    assert all(x > 0 for x in a)
    assert all(x <= y for x, y in zip(a, a[1:]))


def test_enveloping_growth():
    assert enveloping_growth([0] * 10, 10).values == (1,) * 11
    assert enveloping_growth([1] + [0] * 9, 10).values == tuple(range(1, 12))
    inc = [3, 1, 4, 1, 5]
    gu = enveloping_growth(inc, 5).values
    acc = 1
    for n in range(1, 6):
        acc += inc[n - 1]
        assert gu[n] >= acc


def test_floor_n2_log2():
    for n in range(1, 200):
        x = n * n * math.log2(n + 1)
        assert floor_n2_log2(n) == math.floor(x) or abs(x - round(x)) < 1e-6
    assert floor_n2_log2(1) == 1
    assert floor_n2_log2(3) == 18


def test_series_lemma_examples():
    one_t = TruncatedSeries((1, 1))
    rep = check_series_lemma(one_t, one_t, 1, 1)
    assert rep.domination.status == "pass" and rep.domination.lhs == 2
    z = TruncatedSeries((0, 0, 0, 0, 0))
    rep = check_series_lemma(z, z, 4, 0, d=(1, 1))
    assert rep.product_cap.lhs == 3 and rep.product_cap.rhs == 16
    assert rep.product_cap.status == "pass"
    assert rep.domination.status == "hypothesis-not-met"


def test_series_lemma_product_bound_fails_at_R1():
    z = TruncatedSeries((0, 0))
    rep = check_series_lemma(z, z, 1, 0, d=(2,))
    assert rep.product_cap.status == "fail" and rep.product_cap.lhs == 2


def test_series_lemma_random():
    rng = random.Random(2024)
    for _ in range(100):
        deg = rng.randint(2, 64)
        f = TruncatedSeries(tuple(rng.randint(0, 9) for _ in range(deg + 1)))
        g = TruncatedSeries(tuple(rng.randint(0, 9) for _ in range(deg + 1)))
        R = rng.randint(2, deg)
        d = [rng.randint(0, 3) for _ in range(rng.randint(1, 6))]
        rep = check_series_lemma(f, g, R, max(f.coeffs[:R + 1]), d)
        assert rep.ok


def test_lemdom_profile():
    p = build_lemdom_profile(lambda n: n * n, 6, [(2, 3, 4, 5)])
    assert p.values[:3] == [2, 4, 16]
    assert all(p.verify().values())
    pure = build_lemdom_profile(lambda n: 1, 5, [(2, 5, 6, 7)])
    assert pure.values == [2 ** (2 ** k) for k in range(6)]
    auto = build_lemdom_profile(lambda n: 2 ** math.isqrt(n), 12)
    assert all(auto.verify().values())
    assert auto.marks.count("hold") > 0
    assert auto.at(5) == auto.values[2] or auto.at(5) == auto.values[3]
    with pytest.raises(SeriesError):
        build_lemdom_profile(lambda n: 2 ** (n * n), 4)


def test_qdim():
    g = [n ** 3 for n in range(4097)]
    lo, hi = qdim_estimate(g, 2)
    assert abs(lo - 3) < 0.05 and abs(hi - 3) < 0.05
    g = [math.ceil(math.exp(n ** 0.75)) for n in range(4097)]
    lo, hi = qdim_estimate(g, 3)
    assert abs(lo - 3) < 0.2 and abs(hi - 3) < 0.2
    assert qdim_estimate([7] * 20, 1) == (7.0, 7.0)
    with pytest.raises(SeriesError):
        qdim_estimate([1] * 10, 2)
