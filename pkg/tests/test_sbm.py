import math
import random

import numpy as np
import pytest

from artifact.sbm import (GrowthTarget, w_gamma_profile, SBMError, build_level_schedule, build_sb_sets,
                          cumulative_h, generate_S_prefix, generate_T_prefix,
                          language_complexity, w_upper_from_h, t_stream, verify_sbm_sandwich,
                          w_gamma_language, w_gamma_leveled)
from oracles import language_counts, naive_factors, sb_words

DOUBLING = GrowthTarget(tuple(2 ** (k + 1) for k in range(11)), "ratio")
# p(1..12) of the doubling profile; checked against literal enumeration below
DOUBLING_P = (2, 4, 6, 10, 12, 14, 18, 26, 28, 30, 32, 34)
SQUARING = GrowthTarget((2, 3, 9), "square")
SQUARING_P = (2, 4, 8, 14, 26, 46, 84, 148, 268, 470, 846, 1478, 2648, 4612, 8232, 14302)


def test_sizes_examples():
    assert build_sb_sets(GrowthTarget((2, 4, 8)), 2).sizes() == [(2, 2), (4, 2), (8, 1)]
    s = build_sb_sets(GrowthTarget((2, 2, 2, 2)), 3)
    assert all(k == 1 and w == 2 for w, k in s.sizes())
    s = build_sb_sets(GrowthTarget((2, 3, 9)), 2)
    assert s.sizes()[:2] == [(2, 2), (4, 3)] and s.size_W(2) == 12
    assert not s.divisible_flag and build_sb_sets(DOUBLING, 4).divisible_flag
    assert s.check_sizes() == []


def test_invalid_targets():
    with pytest.raises(SBMError):
        GrowthTarget((2, 5))          # above the square
    with pytest.raises(SBMError):
        GrowthTarget((4, 3))
    assert GrowthTarget((2, 3, 9)).at(3) == 9 and GrowthTarget((2, 3, 9)).at(5) == 9
    assert SQUARING.at(8) == 81 and DOUBLING.at(2 ** 12) == 2 ** 13


def test_words_match_literal_sort():
    for vals in [(2, 4, 8, 16, 32), (2, 3, 9, 81), (3, 6, 12, 30, 60), (2, 2, 3, 5, 8)]:
        f = GrowthTarget(vals)
        depth = len(vals) - 1
        s = build_sb_sets(f, depth)
        lit = sb_words(vals, depth, vals[0])
        for j in range(depth + 1):
            assert [tuple(r) for r in s.W(j).tolist()] == lit[j]


def test_language_matches_enumeration():
    assert language_complexity(build_sb_sets(DOUBLING, 10), 12).values == DOUBLING_P
    lit = sb_words([2 ** (k + 1) for k in range(11)], 10, 2)[10]
    assert tuple(language_counts(lit, 12)) == DOUBLING_P
    assert language_complexity(build_sb_sets(SQUARING, 2), 16).values == SQUARING_P
    lit = sb_words([2, 3, 9, 81, 6561], 4, 2)[4]
    assert tuple(language_counts(lit, 8)) == SQUARING_P[:8]


def test_language_random_hold_profiles():
    rng = random.Random(11)
    for _ in range(12):
        vals = [rng.randint(2, 3)]
        for _ in range(rng.randint(1, 3)):
            vals.append(rng.randint(vals[-1], min(vals[-1] ** 2, 3 * vals[-1])))
        f = GrowthTarget(tuple(vals))
        s = build_sb_sets(f, len(vals) - 1)
        D = len(vals) - 1
        ext = list(vals) + [vals[-1]] * 5
        lit = sb_words(ext, D + 5, vals[0])[D + 5]
        assert language_complexity(s, 8).values == tuple(language_counts(lit, 8))


def test_lemma_invariants():
    for f, depth, m_max in [(DOUBLING, 10, 6), (SQUARING, 2, 4)]:
        s = build_sb_sets(f, depth)
        p = language_complexity(s, 2 ** m_max)
        assert all(f.at_pow2(m) <= p.values[2 ** m - 1] for m in range(m_max + 1))
        assert all(a <= b for a, b in zip(p.values, p.values[1:]))


def test_sandwich():
    rep = verify_sbm_sandwich(build_sb_sets(DOUBLING, 10), 64)
    assert rep.ok and rep.complete and rep.divisible
    assert all(r.square_ok for r in rep.rows)
    rep = verify_sbm_sandwich(build_sb_sets(SQUARING, 2), 32)
    assert rep.ok and not rep.complete and not rep.divisible
    rep = verify_sbm_sandwich(build_sb_sets(GrowthTarget((2, 2, 2, 2)), 3), 16)
    assert all(r.cubic_ok for r in rep.rows)


def test_bounds_bracket_exact():
    s = build_sb_sets(SQUARING, 2)
    short = language_complexity(s, 8)
    up, lo, exact = cumulative_h(s, short, 16)
    full = [1] + list(SQUARING_P)
    h = np.cumsum(full).tolist()
    assert exact[8] and not exact[9]
    assert all(lo[n] <= h[n] <= up[n] for n in range(17))


def test_block_bound_past_horizon():
    s = build_sb_sets(DOUBLING, 8)
    up, lo, _ = cumulative_h(s, language_complexity(s, 16), 128)
    h = [1] + list(np.cumsum(language_complexity(s, 128).values) + 1)
    assert all(lo[n] <= h[n] <= up[n] for n in range(129))
    # the aligned-pair count keeps the bound within a small factor of h
    assert up[128] < 200 * h[128]


def test_single_word_prefix():
    s = build_sb_sets(GrowthTarget((2, 2, 2, 2)), 3)
    w = generate_S_prefix(s, 7)
    assert w.letters == (0,) * 7
    assert generate_S_prefix(build_sb_sets(SQUARING, 2), 1).letters == (0,)
    with pytest.raises(SBMError):
        generate_S_prefix(s, 64)
    # the first-element word of the doubling profile is constant, so it alone
    # cannot carry f(2^m) factors; the set-level counts above do
    w = generate_S_prefix(build_sb_sets(DOUBLING, 10), 64)
    assert naive_factors(w.letters, 8) == 1


def test_rho_flag():
    s = build_sb_sets(GrowthTarget((2, 2, 2, 2)), 3, rho=True)
    for j in range(1, 4):
        assert set(s.C(j)[0].tolist()) == {0, 1}
    assert generate_S_prefix(s, 8).letters == (0, 0, 1, 0, 0, 0, 1, 0)


def test_level_schedule():
    d = [int(math.log2(i)) + 1 for i in range(1, 40)]
    assert build_level_schedule(d, 3).n[2] == 14
    d = [math.isqrt(i - 1) + 1 for i in range(1, 40)]
    assert build_level_schedule(d, 4).n[3] == 32
    assert build_level_schedule(list(range(1, 20)), 6).n == (2, 4, 6, 8, 10, 12)
    with pytest.raises(SBMError):
        build_level_schedule([1, 2, 1, 3], 1)
    with pytest.raises(SBMError):
        build_level_schedule([1, 2, 3], 5)


def test_T_prefix():
    sched = build_level_schedule(list(range(1, 20)), 8)
    s = build_sb_sets(GrowthTarget((2, 2, 2, 2, 2, 2)), 5)
    t = generate_T_prefix(s, sched, 32)
    assert list(t.levels) == sorted(t.levels) and t.levels[-1] == 2 and t.levels[8] == 2
    assert set(generate_T_prefix(s, sched, 8).levels) == {1}
    s = build_sb_sets(DOUBLING, 10)
    assert generate_T_prefix(s, sched, 64).erase().letters == generate_S_prefix(s, 64).letters


def test_w_gamma():
    s = build_sb_sets(DOUBLING, 10)
    sched = build_level_schedule(list(range(1, 40)), 20)
    st = t_stream(s, sched)
    vals = [w_gamma_leveled(st, n, 256).value for n in range(0, 12)]
    assert vals[0] == 0 and vals == sorted(vals)
    # inside the level-1 region level-sum is the length
    first = generate_S_prefix(s, 8).letters
    assert vals[3] >= sum(naive_factors(first, k) for k in range(1, 4))
    v = w_gamma_leveled(st, 8, 256).value
    assert DOUBLING.at(1) <= v <= 64 * 8 ** 5 * DOUBLING.at(32)
    h = [1] + list(np.cumsum(language_complexity(s, 16).values) + 1)
    lang = [w_gamma_language(s, sched, n, 9).value for n in range(1, 17)]
    assert lang == sorted(lang)
    for n in range(1, 17):
        assert lang[n - 1] <= w_upper_from_h(h, n)
    # chain f(N / delta(N)) <= w(2N) with delta(i) = i, i.e. f(1) <= w(2N)
    assert all(DOUBLING.at(1) <= lang[2 * N - 1] for N in range(1, 9))


def test_w_gamma_profile_matches_per_budget_count():
    s = build_sb_sets(DOUBLING, 10)
    delta = [math.isqrt(i - 1) + 1 for i in range(1, 120)]
    sched = build_level_schedule(delta, 8)
    prof = w_gamma_profile(s, sched, 40, 7)
    assert prof[0] == 0 and prof == sorted(prof)
    for n in (1, 2, 5, 13, 27, 40):
        assert prof[n] == w_gamma_language(s, sched, n, 7).value
