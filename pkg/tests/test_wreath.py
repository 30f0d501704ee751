import random

import numpy as np
import pytest

from artifact.wreath import (TruncatedModel, WreathError, check_two_map_identity,
                             compose_growth_bounds, decomposition_sides, enumerate_models,
                             letter_gamma, random_images, random_model, verify_decomposition)


def test_compose_examples():
    lower, upper = compose_growth_bounds([n + 1 for n in range(5)], list(range(5)))
    assert upper[2] == 21 and lower[2] == 1
    lower, upper = compose_growth_bounds([1, 2, 3], [0, 0, 0])
    assert lower.values == (0, 0, 0) and upper.values == (1, 2, 3)
    with pytest.raises(WreathError):
        compose_growth_bounds([1, 2], [0, 0, 0])
    with pytest.raises(WreathError):
        compose_growth_bounds([1, 2, 1], [0, 0, 0])


def test_compose_sandwich_and_monotone():
    rng = random.Random(3)
    for _ in range(50):
        gb = sorted(rng.randint(1, 50) for _ in range(30))
        w = sorted(rng.randint(0, 500) for _ in range(30))
        lo, up = compose_growth_bounds(gb, w)
        assert all(a <= b for a, b in zip(lo.values, up.values))
        assert lo.is_monotone() and up.is_monotone()


def _two_dim_nilpotent(cap=3):
    t = np.zeros((2, 2, 2), dtype=np.int64)
    t[0, 0, 0] = t[0, 1, 1] = t[1, 0, 1] = 1      # b^2 = 0
    return TruncatedModel(t, [{(0,): 1}, {(0,): 1}], cap, 1)


def test_s1_and_s2_small_model():
    m = _two_dim_nilpotent()
    assert verify_decomposition(m, 1, exhaustive=True).passed == 4
    rep = verify_decomposition(m, 2, exhaustive=True)
    assert rep.passed == 8 and rep.failed == 0
    left, right = decomposition_sides(m, (1, 0), 0)
    assert left == right == {(0, (0, 0)): 1}


def test_exhaustive_small_models():
    models = list(enumerate_models(2, 4))
    # dim 1, plus all nine tables b^2 = u + v b (always associative)
    assert len(models) == 10
    for m in models:
        for s in (1, 2, 3):
            rep = verify_decomposition(m, s, exhaustive=True)
            assert rep.failed == 0 and rep.skipped == 0


def test_overflow_is_skipped():
    m = _two_dim_nilpotent(cap=2)
    rep = verify_decomposition(m, 3, exhaustive=True)
    assert rep.failed == 0 and rep.skipped == 16


def test_invalid_model():
    t = np.zeros((2, 2, 2), dtype=np.int64)
    t[0, 0, 0] = t[0, 1, 1] = t[1, 0, 1] = 1
    t[0, 1] = [1, 0]          # 1 * b = 1: not a unit
    bad = TruncatedModel(t, letter_gamma(2), 4, 2)
    with pytest.raises(WreathError):
        verify_decomposition(bad, 1, exhaustive=True)


def test_random_trials_s4():
    for k in range(20):
        m = random_model(3, 4, seed=k)
        rep = verify_decomposition(m, 4, trials=1, seed=k)
        assert rep.passed == 1


def test_two_map_identity():
    rng = random.Random(5)
    for k in range(20):
        m = random_model(3, 6, seed=100 + k)
        assert check_two_map_identity(m, random_images(3, 2, rng), random_images(3, 2, rng))


def test_detects_wrong_product_order():
    """Reversing mu in the map product must break the identity."""
    m = random_model(2, 4, seed=1, letters=2)
    m.gamma = [{(0,): 1}, {(1,): 1}]

    class Flipped(TruncatedModel):
        def lin_lin(self, f, g):
            out = []
            for x in range(self.dim):
                acc = {}
                for (i, a), c in g[x].items():
                    for (j, a2), c2 in f[i].items():
                        key = (j, a + a2)
                        acc[key] = acc.get(key, 0) + c * c2
                out.append({k: v for k, v in acc.items() if v})
            return tuple(out)

    bad = Flipped(m.table, m.gamma, m.cap, m.letters)
    assert verify_decomposition(bad, 2, exhaustive=True).failed > 0
