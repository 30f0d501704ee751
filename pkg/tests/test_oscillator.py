import random
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st

from artifact.oscillator import (CostedAlphabet, ForbiddenBlockRules, OscillatorError,
                                 brute_force_count, build_osc_schedule, count_nonzero_monomials,
                                 cumulative_counts, verify_oscillation, w_profile)

F1 = isqrt


def F2(n):
    return 2 ** isqrt(n)


def test_count_examples():
    two = CostedAlphabet(((1, 2), (2, 2)))
    assert count_nonzero_monomials(two, ForbiddenBlockRules.from_list([4, 4]), 6) == 14
    assert count_nonzero_monomials(two, ForbiddenBlockRules.from_list([4, 4]), 1) == 0
    one = CostedAlphabet(((1, 2),))
    assert count_nonzero_monomials(one, ForbiddenBlockRules.from_list([3]), 10) == 2


def test_rules_validation():
    with pytest.raises(OscillatorError):
        ForbiddenBlockRules.from_list([3, 2])
    with pytest.raises(OscillatorError):
        ForbiddenBlockRules.from_list([1])
    short = ForbiddenBlockRules.from_list([3])
    with pytest.raises(OscillatorError):
        count_nonzero_monomials(CostedAlphabet(((1, 1), (2, 1))), short, 3)


def _random_instance(rng):
    k = rng.randint(1, 3)
    idx = sorted(rng.sample(range(1, 6), k))
    letters = tuple((i, rng.randint(1, 4)) for i in idx)
    d = sorted(rng.randint(2, 5) for _ in range(idx[-1]))
    return CostedAlphabet(letters), ForbiddenBlockRules.from_list(d)


def test_dp_matches_brute_force():
    rng = random.Random(11)
    for _ in range(40):
        alpha, rules = _random_instance(rng)
        table = cumulative_counts(alpha, rules, 14)
        for n in range(15):
            assert table[n] == brute_force_count(alpha, rules, n)
            assert count_nonzero_monomials(alpha, rules, n) == table[n]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_monotone_and_unlimited(seed):
    alpha, rules = _random_instance(random.Random(seed))
    table = cumulative_counts(alpha, rules, 20)
    assert all(a <= b for a, b in zip(table, table[1:]))
    K = count_nonzero_monomials(alpha, rules, None)
    assert table[-1] <= K
    assert count_nonzero_monomials(alpha, rules, 10 ** 6) == K


def test_lower_bound_two_letters():
    for p in range(1, 6):
        alpha = CostedAlphabet(((1, 2), (2, 2)))
        rules = ForbiddenBlockRules.from_list([p + 1, p + 1])
        for s in range(1, 4):
            assert count_nonzero_monomials(alpha, rules, 2 * p * s) >= 2 ** p


def test_schedule_sqrt_defaults():
    sched = build_osc_schedule(F1, F2, 1)
    assert sched.p == 1 and sched.stages[0].n == 2
    sched = build_osc_schedule(F1, F2, 2)
    assert sched.pairs[0] == (2, 4)
    assert sched.stages[1].n == 24
    assert sched.check_invariants() == []
    for chk in verify_oscillation(sched):
        assert chk.fast_ok and chk.slow_ok


def test_schedule_p3_variant():
    sched = build_osc_schedule(F1, F2, 2, p_min=3, f1_inverse=lambda K: K * K)
    assert sched.p == 3
    first, second = sched.stages
    assert (first.n, first.K, first.m) == (6, 14, 196)
    assert second.n == 38808 and second.n % (first.m + 2) == 0
    assert sched.check_invariants() == []
    checks = verify_oscillation(sched)
    assert checks[0].w_n == 14 and checks[0].f2_n == 4
    assert all(c.fast_ok and c.slow_ok for c in checks)
    assert checks[1].w_m == second.K


def test_schedule_degenerate():
    assert verify_oscillation(build_osc_schedule(F1, F2, 0)) == []
    with pytest.raises(OscillatorError) as err:
        build_osc_schedule([1] * 50, [1] * 50, 1)
    assert err.value.code == "table-exhausted"


def test_inverse_is_checked():
    with pytest.raises(OscillatorError):
        build_osc_schedule(F1, F2, 1, f1_inverse=lambda K: K * K + 5)


def test_w_profile_plateau():
    sched = build_osc_schedule(F1, F2, 2)
    w = w_profile(sched, 30)
    first = sched.stages[0]
    assert w[first.m] == first.K
    assert all(a <= b for a, b in zip(w, w[1:]))
